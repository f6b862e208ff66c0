#include "qpar/cheatsheet.hpp"

#include <algorithm>

#include "qpar/constructions.hpp"
#include "qpar/measures.hpp"

namespace qpar {

CertificateFormat CertificateFormat::for_arity(int inner_arity) {
  CertificateFormat fmt;
  fmt.index_bits = std::max(1, ceil_log2((std::uint64_t)inner_arity));
  return fmt;
}

Bits encode_certificates(const std::vector<Certificate>& certs, const CertificateFormat& fmt,
                         int width) {
  Bits out(width);
  int pos = 0;
  for (const auto& cert : certs) {
    std::uint64_t count = (std::uint64_t)cert.entries.size();
    if (count >> fmt.count_bits) throw TooLarge("certificate entry count overflows its field");
    if (pos + fmt.count_bits + (int)count * fmt.entry_bits() > width)
      throw TooLarge("certificates do not fit the cell");
    out.set_slice(pos, fmt.count_bits, count);
    pos += fmt.count_bits;
    for (auto [idx, val] : cert.entries) {
      if (idx < 0 || (std::uint64_t(idx) >> fmt.index_bits))
        throw IndexOutOfRange("certificate index overflows its field");
      out.set_slice(pos, fmt.index_bits, (std::uint64_t)idx);
      pos += fmt.index_bits;
      out.set(pos++, val & 1);
    }
  }
  return out;
}

std::optional<std::vector<Certificate>> decode_certificates(const Bits& cell,
                                                            const CertificateFormat& fmt,
                                                            int copies, int inner_arity) {
  std::vector<Certificate> certs(copies);
  int pos = 0;
  for (int i = 0; i < copies; ++i) {
    if (pos + fmt.count_bits > cell.n) return std::nullopt;
    std::uint64_t count = cell.slice(pos, fmt.count_bits);
    pos += fmt.count_bits;
    if (count > (std::uint64_t)inner_arity) return std::nullopt;
    if (pos + (int)count * fmt.entry_bits() > cell.n) return std::nullopt;
    std::vector<char> seen(inner_arity, 0);
    for (std::uint64_t e = 0; e < count; ++e) {
      int idx = (int)cell.slice(pos, fmt.index_bits);
      pos += fmt.index_bits;
      int val = cell.get(pos++);
      if (idx >= inner_arity || seen[idx]) return std::nullopt;
      seen[idx] = 1;
      certs[i].entries.push_back({idx, val});
    }
  }
  for (; pos < cell.n; ++pos)
    if (cell.get(pos)) return std::nullopt;  // nonzero padding
  return certs;
}

bool certificate_forces(const BooleanFunction& f, const Certificate& cert, int v) {
  int n = f.arity();
  std::vector<char> fixed(n, 0);
  Bits x(n);
  for (auto [idx, val] : cert.entries) {
    fixed[idx] = 1;
    x.set(idx, val);
  }
  std::vector<int> free_pos;
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) free_pos.push_back(i);
  if (free_pos.size() > 22) throw TooLarge("certificate forcing check past 2^22 completions");
  std::uint64_t total = std::uint64_t(1) << free_pos.size();
  for (std::uint64_t a = 0; a < total; ++a) {
    for (std::size_t b = 0; b < free_pos.size(); ++b) x.set(free_pos[b], int(a >> b & 1));
    if (!f.in_domain(x) || f.evaluate(x) != v) return false;
  }
  return true;
}

CertChecker default_cert_checker(const BooleanFunction& f_inner, const CheatSheetLayout& layout) {
  CertificateFormat fmt = CertificateFormat::for_arity(layout.inner_arity);
  return [f_inner, layout, fmt](const Bits& cell, const std::vector<Bits>& copies,
                                const Bits& ell) {
    auto certs = decode_certificates(cell, fmt, layout.copies, layout.inner_arity);
    if (!certs) return false;
    for (int i = 0; i < layout.copies; ++i) {
      for (auto [idx, val] : (*certs)[i].entries)
        if (copies[i].get(idx) != val) return false;
      if (!certificate_forces(f_inner, (*certs)[i], ell.get(i))) return false;
    }
    return true;
  };
}

int default_cell_size(int inner_arity, int copies) {
  CertificateFormat fmt = CertificateFormat::for_arity(inner_arity);
  return copies * (fmt.count_bits + inner_arity * fmt.entry_bits());
}

BooleanFunction make_cheatsheet(const BooleanFunction& f_inner, int c, int cell_size,
                                CertChecker checker) {
  if (c < 1 || c > 20) throw ArityMismatch("cheat sheet needs 1 <= c <= 20");
  if (cell_size < 1) throw ArityMismatch("cheat sheet needs a positive cell size");
  CheatSheetLayout layout{f_inner.arity(), c, cell_size};
  if ((std::int64_t)layout.copies * layout.inner_arity +
          (std::int64_t)layout.cell_size * layout.cells() >
      (std::int64_t(1) << 26))
    throw TooLarge("cheat sheet input exceeds 2^26 bits");
  if (!checker) checker = default_cert_checker(f_inner, layout);
  BooleanFunction::GeneratorSpec spec;
  spec.name = "cheatsheet:" + f_inner.kind();
  spec.params = {{"copies", c}, {"cell-size", cell_size}};
  spec.arity = layout.arity();
  spec.eval = [f_inner, layout, checker](const Bits& z) {
    std::vector<Bits> copies(layout.copies);
    Bits ell(layout.copies);
    for (int i = 0; i < layout.copies; ++i) {
      copies[i] = layout.copy_bits(z, i);
      if (!f_inner.in_domain(copies[i])) return 0;
      ell.set(i, f_inner.evaluate(copies[i]));
    }
    Bits cell = layout.cell_bits(z, (int)ell.index());
    if (cell.popcount() == 0) return 0;  // all-zero cells never certify
    return checker(cell, copies, ell) ? 1 : 0;
  };
  return BooleanFunction::from_generator(std::move(spec));
}

CheatSheetLayout canonical_cheatsheet_layout(int f_arity, int ao_blocks, int ao_block_size, int c,
                                             int cell_size) {
  int inner = f_arity * ao_blocks * ao_block_size;
  if (cell_size == 0) cell_size = default_cell_size(inner, c);
  return CheatSheetLayout{inner, c, cell_size};
}

BooleanFunction make_canonical_cheatsheet(const BooleanFunction& f, int ao_blocks,
                                          int ao_block_size, int c, int cell_size) {
  BooleanFunction ao = make_and_or(ao_blocks, ao_block_size);
  std::vector<BooleanFunction> inners(f.arity(), ao);
  BooleanFunction fprime = compose(f, inners);
  if (cell_size == 0) cell_size = default_cell_size(fprime.arity(), c);
  return make_cheatsheet(fprime, c, cell_size);
}

namespace {

BooleanFunction wrap_named(const BooleanFunction& base, std::string name, GenParams params) {
  BooleanFunction::GeneratorSpec spec;
  spec.name = std::move(name);
  spec.params = std::move(params);
  spec.arity = base.arity();
  spec.eval = [base](const Bits& z) { return base.evaluate(z); };
  return BooleanFunction::from_generator(std::move(spec));
}

}  // namespace

BooleanFunction make_ccs_dj(int n, int ao_blocks, int ao_block_size, int c, int cell_size) {
  BooleanFunction f = make_dj(n);
  CheatSheetLayout layout =
      canonical_cheatsheet_layout(f.arity(), ao_blocks, ao_block_size, c, cell_size);
  return wrap_named(make_canonical_cheatsheet(f, ao_blocks, ao_block_size, c, layout.cell_size),
                    "ccs-dj",
                    {{"n", n},
                     {"ao-blocks", ao_blocks},
                     {"ao-block-size", ao_block_size},
                     {"copies", c},
                     {"cell-size", layout.cell_size}});
}

BooleanFunction make_ccs_for(int n, int ao_blocks, int ao_block_size, int c, int cell_size) {
  BooleanFunction f = make_forrelation(n);
  CheatSheetLayout layout =
      canonical_cheatsheet_layout(f.arity(), ao_blocks, ao_block_size, c, cell_size);
  return wrap_named(make_canonical_cheatsheet(f, ao_blocks, ao_block_size, c, layout.cell_size),
                    "ccs-for",
                    {{"n", n},
                     {"ao-blocks", ao_blocks},
                     {"ao-block-size", ao_block_size},
                     {"copies", c},
                     {"cell-size", layout.cell_size}});
}

Bits build_cheatsheet_input(const BooleanFunction& f_inner, const CheatSheetLayout& layout,
                            const std::vector<Bits>& copies, bool valid_cert) {
  if ((int)copies.size() != layout.copies)
    throw ArityMismatch("need one address input per copy");
  Bits z(layout.arity());
  Bits ell(layout.copies);
  std::vector<Certificate> certs(layout.copies);
  for (int i = 0; i < layout.copies; ++i) {
    if (copies[i].n != layout.inner_arity) throw ArityMismatch("address copy has wrong width");
    if (!f_inner.in_domain(copies[i]))
      throw ConstructionFailed("address copy outside the inner domain");
    z.set_range(layout.copy_offset(i), copies[i]);
    ell.set(i, f_inner.evaluate(copies[i]));
    for (int b = 0; b < layout.inner_arity; ++b) certs[i].entries.push_back({b, copies[i].get(b)});
  }
  if (valid_cert) {
    CertificateFormat fmt = CertificateFormat::for_arity(layout.inner_arity);
    Bits cell = encode_certificates(certs, fmt, layout.cell_size);
    z.set_range(layout.cell_offset((int)ell.index()), cell);
  }
  return z;
}

BsWitness build_block_sensitivity_witness(const BooleanFunction& g, const BooleanFunction& h,
                                          int c, std::vector<Bits> z_choices) {
  if (!h.total()) throw ConstructionFailed("the inner layer must be total");
  int G = g.arity(), H = h.arity();
  BlockSensitivityResult side[2] = {block_sensitivity(h, 0), block_sensitivity(h, 1)};
  if (side[0].value <= 0 || side[1].value <= 0)
    throw ConstructionFailed("the inner layer needs sensitive inputs on both sides");

  if (z_choices.empty()) {
    for (std::uint64_t i = 0; i < (std::uint64_t(1) << G); ++i)
      if (g.in_domain_index(i)) {
        z_choices.assign(c, Bits::from_index(G, i));
        break;
      }
    if (z_choices.empty()) throw ConstructionFailed("the outer function has an empty domain");
  }
  if ((int)z_choices.size() != c) throw ConstructionFailed("need one outer input per copy");

  std::vector<BooleanFunction> hs(G, h);
  BooleanFunction fprime = compose(g, hs);
  CheatSheetLayout layout{G * H, c, default_cell_size(G * H, c)};

  std::vector<Bits> copies(c);
  for (int i = 0; i < c; ++i) {
    const Bits& z = z_choices[i];
    if (z.n != G || !g.in_domain(z))
      throw ConstructionFailed("outer input outside the outer domain");
    copies[i] = Bits(layout.inner_arity);
    for (int j = 0; j < G; ++j) copies[i].set_range(j * H, side[z.get(j)].witness);
  }

  BsWitness w;
  w.fcs = make_cheatsheet(fprime, c, layout.cell_size);
  w.layout = layout;
  w.input = build_cheatsheet_input(fprime, layout, copies);
  if (w.fcs.evaluate(w.input) != 1)
    throw ConstructionFailed("constructed witness does not evaluate to 1");

  for (int i = 0; i < c; ++i) {
    const Bits& z = z_choices[i];
    for (int j = 0; j < G; ++j) {
      Bits zflip = z;
      zflip.flip(j);
      int kase = !g.in_domain(zflip) ? 0 : (g.evaluate(zflip) != g.evaluate(z) ? 1 : 2);
      for (const auto& blk : side[z.get(j)].blocks) {
        Bits mask(layout.arity());
        for (int b : blk) mask.set(layout.copy_offset(i) + j * H + b, 1);
        w.blocks.push_back(mask);
        w.cases.push_back(kase);
      }
    }
  }
  return w;
}

namespace {

std::int64_t need_param(const GenParams& ps, const char* key) {
  for (auto& [k, v] : ps)
    if (k == key) return v;
  throw ParseError(std::string("missing generator param: ") + key);
}

}  // namespace

void register_cheatsheet_generators() {
  BooleanFunction::register_generator("ccs-dj", [](const GenParams& ps) {
    return make_ccs_dj((int)need_param(ps, "n"), (int)need_param(ps, "ao-blocks"),
                       (int)need_param(ps, "ao-block-size"), (int)need_param(ps, "copies"),
                       (int)need_param(ps, "cell-size"));
  });
  BooleanFunction::register_generator("ccs-for", [](const GenParams& ps) {
    return make_ccs_for((int)need_param(ps, "n"), (int)need_param(ps, "ao-blocks"),
                        (int)need_param(ps, "ao-block-size"), (int)need_param(ps, "copies"),
                        (int)need_param(ps, "cell-size"));
  });
}

}  // namespace qpar
