#include "qpar/boolfn.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace qpar {

struct BooleanFunction::Impl {
  int arity = 0;
  bool table = false;
  std::string kind = "table";
  GenParams params;
  std::optional<BlockMeta> blocks;

  // table backing; outputs are zeroed outside the domain so equal functions
  // have identical words
  std::vector<Word> outputs;
  std::vector<Word> domain;
  bool domain_full = false;

  GeneratorSpec gen;  // generator backing
};

namespace {

std::size_t table_words(int arity) {
  return std::size_t(((std::uint64_t(1) << arity) + 63) / 64);
}

bool word_bit(const std::vector<Word>& w, std::uint64_t i) {
  return (w[i >> 6] >> (i & 63)) & 1;
}

void check_table_arity(int arity) {
  if (arity < 1) throw ArityMismatch("arity must be >= 1");
  if (arity > BooleanFunction::kTableArityCap)
    throw TooLarge("truth table backing capped at arity " +
                   std::to_string(BooleanFunction::kTableArityCap));
}

std::map<std::string, BooleanFunction::GeneratorFactory>& registry() {
  static std::map<std::string, BooleanFunction::GeneratorFactory> reg;
  return reg;
}

}  // namespace

BooleanFunction BooleanFunction::from_table(int arity, std::vector<Word> outputs,
                                            std::vector<Word> domain) {
  check_table_arity(arity);
  auto impl = std::make_shared<Impl>();
  impl->arity = arity;
  impl->table = true;
  std::size_t nw = table_words(arity);
  outputs.resize(nw, 0);
  domain.resize(nw, 0);
  std::uint64_t total_bits = std::uint64_t(1) << arity;
  if (total_bits & 63) {
    Word tail = (Word(1) << (total_bits & 63)) - 1;
    outputs.back() &= tail;
    domain.back() &= tail;
  }
  for (std::size_t i = 0; i < nw; ++i) outputs[i] &= domain[i];
  impl->domain_full = true;
  for (std::size_t i = 0; i + 1 < nw; ++i)
    if (domain[i] != ~Word(0)) impl->domain_full = false;
  {
    Word tail = (total_bits & 63) ? ((Word(1) << (total_bits & 63)) - 1) : ~Word(0);
    if (domain.back() != tail) impl->domain_full = false;
  }
  impl->outputs = std::move(outputs);
  impl->domain = std::move(domain);
  BooleanFunction f;
  f.impl_ = std::move(impl);
  return f;
}

BooleanFunction BooleanFunction::total_from_bits(int arity, const std::vector<int>& outputs) {
  check_table_arity(arity);
  std::uint64_t total = std::uint64_t(1) << arity;
  if (outputs.size() != total) throw ArityMismatch("output vector size != 2^arity");
  std::vector<Word> out(table_words(arity), 0), dom(table_words(arity), 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    dom[i >> 6] |= Word(1) << (i & 63);
    if (outputs[i]) out[i >> 6] |= Word(1) << (i & 63);
  }
  return from_table(arity, std::move(out), std::move(dom));
}

BooleanFunction BooleanFunction::from_predicate(
    int arity, const std::function<int(std::uint64_t)>& out,
    const std::function<bool(std::uint64_t)>& dom) {
  check_table_arity(arity);
  std::uint64_t total = std::uint64_t(1) << arity;
  std::vector<Word> o(table_words(arity), 0), d(table_words(arity), 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    if (!dom || dom(i)) {
      d[i >> 6] |= Word(1) << (i & 63);
      if (out(i)) o[i >> 6] |= Word(1) << (i & 63);
    }
  }
  return from_table(arity, std::move(o), std::move(d));
}

BooleanFunction BooleanFunction::from_generator(GeneratorSpec spec) {
  if (spec.arity < 1) throw ArityMismatch("arity must be >= 1");
  if (!spec.eval) throw ParseError("generator needs an eval callback");
  auto impl = std::make_shared<Impl>();
  impl->arity = spec.arity;
  impl->table = false;
  impl->kind = spec.name;
  impl->params = spec.params;
  impl->blocks = spec.blocks;
  if (spec.in_domain) spec.total = false;
  impl->gen = std::move(spec);
  BooleanFunction f;
  f.impl_ = std::move(impl);
  return f;
}

int BooleanFunction::arity() const { return impl_->arity; }
bool BooleanFunction::is_table() const { return impl_->table; }

bool BooleanFunction::total() const {
  return impl_->table ? impl_->domain_full : impl_->gen.total;
}

const std::string& BooleanFunction::kind() const { return impl_->kind; }
const GenParams& BooleanFunction::params() const { return impl_->params; }
const std::optional<BlockMeta>& BooleanFunction::block_meta() const { return impl_->blocks; }

BooleanFunction BooleanFunction::with_block_meta(BlockMeta meta) const {
  if (meta.block_bits * meta.block_count != impl_->arity)
    throw ArityMismatch("block meta does not cover the arity");
  auto impl = std::make_shared<Impl>(*impl_);
  impl->blocks = meta;
  BooleanFunction f;
  f.impl_ = std::move(impl);
  return f;
}

bool BooleanFunction::in_domain(const Bits& x) const {
  if (x.n != impl_->arity) throw ArityMismatch("input has wrong arity");
  if (impl_->table) return word_bit(impl_->domain, x.index());
  return impl_->gen.in_domain ? impl_->gen.in_domain(x) : true;
}

bool BooleanFunction::in_domain_index(std::uint64_t idx) const {
  if (impl_->table) return word_bit(impl_->domain, idx);
  return in_domain(Bits::from_index(impl_->arity, idx));
}

int BooleanFunction::evaluate(const Bits& x) const {
  if (x.n != impl_->arity) throw ArityMismatch("input has wrong arity");
  if (impl_->table) {
    std::uint64_t i = x.index();
    if (!word_bit(impl_->domain, i)) throw OutOfDomain("input outside promise");
    return word_bit(impl_->outputs, i) ? 1 : 0;
  }
  if (impl_->gen.in_domain && !impl_->gen.in_domain(x))
    throw OutOfDomain("input outside promise");
  return impl_->gen.eval(x);
}

int BooleanFunction::evaluate_index(std::uint64_t idx) const {
  if (impl_->table) {
    if (!word_bit(impl_->domain, idx)) throw OutOfDomain("input outside promise");
    return word_bit(impl_->outputs, idx) ? 1 : 0;
  }
  return evaluate(Bits::from_index(impl_->arity, idx));
}

CubeValues BooleanFunction::cube_values(const PartialInput& pa) const {
  int n = impl_->arity;
  if (pa.mask.n != n || pa.value.n != n) throw ArityMismatch("partial input has wrong arity");
  if (!impl_->table && impl_->gen.cube) return impl_->gen.cube(pa);
  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (!pa.mask.get(i)) free.push_back(i);
  if (free.size() > 24) throw TooLarge("cube enumeration capped at 2^24 completions");
  Bits x = pa.value;
  for (int i : free) x.set(i, 0);
  for (int i = 0; i < n; ++i)
    if (pa.mask.get(i)) x.set(i, pa.value.get(i));
  CubeValues cv;
  std::uint64_t m = std::uint64_t(1) << free.size();
  for (std::uint64_t c = 0; c < m; ++c) {
    for (std::size_t j = 0; j < free.size(); ++j) x.set(free[j], int((c >> j) & 1));
    if (!in_domain(x)) continue;
    if (evaluate(x)) cv.sees1 = true; else cv.sees0 = true;
    if (cv.sees0 && cv.sees1) break;
  }
  return cv;
}

BooleanFunction BooleanFunction::to_table() const {
  if (impl_->table) return *this;
  check_table_arity(impl_->arity);
  std::uint64_t total = std::uint64_t(1) << impl_->arity;
  std::vector<Word> out(table_words(impl_->arity), 0), dom(table_words(impl_->arity), 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    Bits x = Bits::from_index(impl_->arity, i);
    if (!in_domain(x)) continue;
    dom[i >> 6] |= Word(1) << (i & 63);
    if (impl_->gen.eval(x)) out[i >> 6] |= Word(1) << (i & 63);
  }
  BooleanFunction f = from_table(impl_->arity, std::move(out), std::move(dom));
  if (impl_->blocks) f = f.with_block_meta(*impl_->blocks);
  return f;
}

namespace {

std::string bits_to_hex(const std::vector<Word>& w, std::uint64_t nbits) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t nbytes = (nbits + 7) / 8;
  std::string s;
  s.reserve(nbytes * 2);
  for (std::uint64_t b = 0; b < nbytes; ++b) {
    unsigned byte = unsigned((w[b >> 3] >> ((b & 7) * 8)) & 0xff);
    s.push_back(digits[byte >> 4]);
    s.push_back(digits[byte & 0xf]);
  }
  return s;
}

std::vector<Word> hex_to_bits(const std::string& s, std::uint64_t nbits) {
  std::uint64_t nbytes = (nbits + 7) / 8;
  if (s.size() != nbytes * 2) throw ParseError("hex field has wrong length");
  std::vector<Word> w((nbits + 63) / 64, 0);
  auto nib = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return unsigned(c - '0');
    if (c >= 'a' && c <= 'f') return unsigned(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return unsigned(c - 'A' + 10);
    throw ParseError("bad hex digit");
  };
  for (std::uint64_t b = 0; b < nbytes; ++b) {
    unsigned byte = (nib(s[2 * b]) << 4) | nib(s[2 * b + 1]);
    w[b >> 3] |= Word(byte) << ((b & 7) * 8);
  }
  return w;
}

}  // namespace

std::string BooleanFunction::descriptor() const {
  std::ostringstream os;
  os << "arity " << impl_->arity << "\n";
  if (impl_->table) {
    std::uint64_t nbits = std::uint64_t(1) << impl_->arity;
    os << "kind table\n";
    os << "outputs " << bits_to_hex(impl_->outputs, nbits) << "\n";
    os << "domain " << bits_to_hex(impl_->domain, nbits) << "\n";
    return os.str();
  }
  if (!generator_registered(impl_->kind)) {
    if (impl_->arity <= kTableArityCap) return to_table().descriptor();
    throw ParseError("generator '" + impl_->kind + "' is not registered; descriptor would not round-trip");
  }
  os << "kind " << impl_->kind << "\n";
  for (const auto& [k, v] : impl_->params) os << "param " << k << " " << v << "\n";
  return os.str();
}

BooleanFunction BooleanFunction::parse_descriptor(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int arity = -1;
  std::string kind;
  std::string outputs_hex, domain_hex;
  GenParams params;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "arity") {
      if (!(ls >> arity)) throw ParseError("bad arity line");
    } else if (key == "kind") {
      if (!(ls >> kind)) throw ParseError("bad kind line");
    } else if (key == "outputs") {
      if (!(ls >> outputs_hex)) throw ParseError("bad outputs line");
    } else if (key == "domain") {
      if (!(ls >> domain_hex)) throw ParseError("bad domain line");
    } else if (key == "param") {
      std::string name;
      std::int64_t value;
      if (!(ls >> name >> value)) throw ParseError("bad param line");
      params.emplace_back(name, value);
    } else {
      throw ParseError("unknown descriptor line: " + key);
    }
  }
  if (arity < 1) throw ParseError("descriptor missing arity");
  if (kind.empty()) throw ParseError("descriptor missing kind");
  if (kind == "table") {
    check_table_arity(arity);
    std::uint64_t nbits = std::uint64_t(1) << arity;
    if (outputs_hex.empty()) throw ParseError("table descriptor missing outputs");
    std::vector<Word> out = hex_to_bits(outputs_hex, nbits);
    std::vector<Word> dom;
    if (domain_hex.empty()) {
      dom.assign(table_words(arity), ~Word(0));
    } else {
      dom = hex_to_bits(domain_hex, nbits);
    }
    return from_table(arity, std::move(out), std::move(dom));
  }
  BooleanFunction f = build_generator(kind, params);
  if (f.arity() != arity)
    throw ParseError("declared arity " + std::to_string(arity) + " != generator arity " +
                     std::to_string(f.arity()));
  return f;
}

void BooleanFunction::register_generator(const std::string& name, GeneratorFactory factory) {
  registry()[name] = std::move(factory);
}

bool BooleanFunction::generator_registered(const std::string& name) {
  return registry().count(name) != 0;
}

BooleanFunction BooleanFunction::build_generator(const std::string& name,
                                                 const GenParams& params) {
  auto it = registry().find(name);
  if (it == registry().end()) throw ParseError("unknown generator: " + name);
  return it->second(params);
}

BooleanFunction restrict_function(const BooleanFunction& f, const Restriction& rho) {
  int n = f.arity();
  std::vector<int> fixed_val(n, -1);
  int nfixed = 0;
  for (auto [i, v] : rho) {
    if (i < 0 || i >= n) throw IndexOutOfRange("restriction index out of range");
    if (v != 0 && v != 1) throw ParseError("restriction value must be 0 or 1");
    if (fixed_val[i] != -1) throw ParseError("restriction repeats an index");
    fixed_val[i] = v;
    ++nfixed;
  }
  if (nfixed == n) throw ArityMismatch("restriction fixes every coordinate");
  std::vector<int> rest;  // old index per new position
  for (int i = 0; i < n; ++i)
    if (fixed_val[i] == -1) rest.push_back(i);
  int m = (int)rest.size();

  auto lift = [=](const Bits& y) {
    Bits x(n);
    for (int i = 0; i < n; ++i)
      if (fixed_val[i] != -1) x.set(i, fixed_val[i]);
    for (int j = 0; j < m; ++j) x.set(rest[j], y.get(j));
    return x;
  };

  if (f.is_table() || m <= BooleanFunction::kTableArityCap) {
    std::uint64_t total = std::uint64_t(1) << m;
    std::vector<Word> out((total + 63) / 64, 0), dom((total + 63) / 64, 0);
    for (std::uint64_t i = 0; i < total; ++i) {
      Bits x = lift(Bits::from_index(m, i));
      if (!f.in_domain(x)) continue;
      dom[i >> 6] |= Word(1) << (i & 63);
      if (f.evaluate(x)) out[i >> 6] |= Word(1) << (i & 63);
    }
    return BooleanFunction::from_table(m, std::move(out), std::move(dom));
  }
  BooleanFunction::GeneratorSpec spec;
  spec.name = "restrict:" + f.kind();
  spec.arity = m;
  spec.total = f.total();
  if (!f.total())
    spec.in_domain = [f, lift](const Bits& y) { return f.in_domain(lift(y)); };
  spec.eval = [f, lift](const Bits& y) { return f.evaluate(lift(y)); };
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction compose(const BooleanFunction& outer,
                        const std::vector<BooleanFunction>& inners) {
  int M = outer.arity();
  if ((int)inners.size() != M) throw ArityMismatch("compose needs one inner per outer input");
  int total = 0;
  std::vector<int> offset(M);
  for (int j = 0; j < M; ++j) {
    offset[j] = total;
    total += inners[j].arity();
  }

  auto inner_tuple = [=](const Bits& x) {
    Bits z(M);
    for (int j = 0; j < M; ++j) {
      Bits xj(inners[j].arity());
      for (int b = 0; b < inners[j].arity(); ++b) xj.set(b, x.get(offset[j] + b));
      z.set(j, inners[j].evaluate(xj));
    }
    return z;
  };
  auto in_dom = [=](const Bits& x) {
    Bits z(M);
    for (int j = 0; j < M; ++j) {
      Bits xj(inners[j].arity());
      for (int b = 0; b < inners[j].arity(); ++b) xj.set(b, x.get(offset[j] + b));
      if (!inners[j].in_domain(xj)) return false;
      z.set(j, inners[j].evaluate(xj));
    }
    return outer.in_domain(z);
  };

  bool all_total = outer.total();
  for (const auto& g : inners) all_total = all_total && g.total();

  bool uniform_blocks = M > 0;
  for (const auto& g : inners)
    uniform_blocks = uniform_blocks && g.arity() == inners[0].arity();

  if (total <= 16) {  // small enough to tabulate eagerly
    std::uint64_t count = std::uint64_t(1) << total;
    std::vector<Word> out((count + 63) / 64, 0), dom((count + 63) / 64, 0);
    for (std::uint64_t i = 0; i < count; ++i) {
      Bits x = Bits::from_index(total, i);
      if (!in_dom(x)) continue;
      dom[i >> 6] |= Word(1) << (i & 63);
      if (outer.evaluate(inner_tuple(x))) out[i >> 6] |= Word(1) << (i & 63);
    }
    BooleanFunction f = BooleanFunction::from_table(total, std::move(out), std::move(dom));
    if (uniform_blocks) f = f.with_block_meta({inners[0].arity(), M});
    return f;
  }

  BooleanFunction::GeneratorSpec spec;
  spec.name = "compose:" + outer.kind();
  spec.arity = total;
  spec.total = all_total;
  if (!all_total) spec.in_domain = in_dom;
  spec.eval = [=](const Bits& x) { return outer.evaluate(inner_tuple(x)); };
  if (uniform_blocks) spec.blocks = BlockMeta{inners[0].arity(), M};
  return BooleanFunction::from_generator(std::move(spec));
}

BooleanFunction make_and(int n) {
  return BooleanFunction::from_predicate(
      n, [n](std::uint64_t i) { return __builtin_popcountll(i) == n; }, nullptr);
}

BooleanFunction make_or(int n) {
  return BooleanFunction::from_predicate(n, [](std::uint64_t i) { return i != 0; }, nullptr);
}

BooleanFunction make_parity(int n) {
  return BooleanFunction::from_predicate(
      n, [](std::uint64_t i) { return __builtin_popcountll(i) & 1; }, nullptr);
}

BooleanFunction make_majority(int n) {
  if (n % 2 == 0) throw ArityMismatch("majority needs odd arity");
  return make_threshold(n, n / 2 + 1);
}

BooleanFunction make_threshold(int n, int t) {
  return BooleanFunction::from_predicate(
      n, [t](std::uint64_t i) { return __builtin_popcountll(i) >= t; }, nullptr);
}

bool equal_on_domain(const BooleanFunction& f, const BooleanFunction& g) {
  if (f.arity() != g.arity()) return false;
  if (f.arity() > BooleanFunction::kTableArityCap)
    throw TooLarge("exhaustive comparison capped at arity 24");
  std::uint64_t total = std::uint64_t(1) << f.arity();
  for (std::uint64_t i = 0; i < total; ++i) {
    Bits x = Bits::from_index(f.arity(), i);
    bool df = f.in_domain(x), dg = g.in_domain(x);
    if (df != dg) return false;
    if (df && f.evaluate(x) != g.evaluate(x)) return false;
  }
  return true;
}

}  // namespace qpar
