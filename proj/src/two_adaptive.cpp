#include "qpar/two_adaptive.hpp"

#include <sstream>

#include "qpar/constructions.hpp"

namespace qpar {

std::string TwoAdaptiveLayout::offset_map_csv() const {
  std::ostringstream os;
  os << "region,i,j,k,bit_start,bit_len\n";
  for (int i = 0; i < segments; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        os << "add," << i << "," << j << "," << k << "," << add_offset(i, j, k) << "," << n
           << "\n";
  for (int i = 0; i < segments; ++i)
    for (int j = 0; j < n; ++j)
      os << "bc," << i << "," << j << ",," << bc_offset(i, j) << "," << bc_cell() << "\n";
  os << "dt,,,," << dt_offset() << "," << dt_size() << "\n";
  return os.str();
}

Bits encode_bicertificate(const Bicertificate& bc, const TwoAdaptiveLayout& layout) {
  int n = layout.n, w = layout.loc_bits();
  if (bc.zero_block < 0 || bc.zero_block >= n || (int)bc.one_part.size() != n)
    throw IndexOutOfRange("malformed bicertificate");
  Bits cell(layout.bc_cell());
  for (int b = 0; b < n; ++b)
    cell.set_slice(b * w, w, (std::uint64_t)(bc.zero_block * n + b));
  for (int b = 0; b < n; ++b) {
    int loc = bc.one_part[b];
    if (loc < b * n || loc >= (b + 1) * n) throw IndexOutOfRange("one-part location off-block");
    cell.set_slice((n + b) * w, w, (std::uint64_t)loc);
  }
  return cell;
}

std::optional<Bicertificate> decode_bicertificate(const Bits& cell,
                                                  const TwoAdaptiveLayout& layout) {
  int n = layout.n, w = layout.loc_bits();
  Bicertificate bc;
  int first = (int)cell.slice(0, w);
  if (first % n != 0) return std::nullopt;
  bc.zero_block = first / n;
  if (bc.zero_block >= n) return std::nullopt;
  for (int b = 0; b < n; ++b)
    if ((int)cell.slice(b * w, w) != bc.zero_block * n + b) return std::nullopt;
  bc.one_part.resize(n);
  for (int b = 0; b < n; ++b) {
    int loc = (int)cell.slice((n + b) * w, w);
    if (loc < b * n || loc >= (b + 1) * n) return std::nullopt;
    bc.one_part[b] = loc;
  }
  return bc;
}

namespace {

// AND over blocks of OR over block bits of one n^2-bit sub-segment.
int and_or_of(const Bits& z, const TwoAdaptiveLayout& layout, int i, int j) {
  for (int k = 0; k < layout.n; ++k) {
    bool any = false;
    int at = layout.add_offset(i, j, k);
    for (int b = 0; b < layout.n && !any; ++b) any = z.get(at + b);
    if (!any) return 0;
  }
  return 1;
}

}  // namespace

BooleanFunction make_two_adaptive(const BooleanFunction& f, int segments,
                                  const std::string& inner_kind) {
  int n = f.arity();
  if (n < 2) throw ArityMismatch("two-adaptive needs inner arity >= 2");
  if (segments < 1 || segments > 24) throw ArityMismatch("two-adaptive needs 1 <= segments <= 24");
  TwoAdaptiveLayout layout{n, segments};
  if ((std::int64_t)layout.arity() > (std::int64_t(1) << 26))
    throw TooLarge("two-adaptive input exceeds 2^26 bits");
  BooleanFunction::GeneratorSpec spec;
  spec.name = "two-adaptive:" + (inner_kind.empty() ? f.kind() : inner_kind);
  spec.params = {{"n", n}, {"segments", segments}};
  spec.arity = layout.arity();
  spec.eval = [f, layout](const Bits& z) {
    Bits tg(layout.segments);
    for (int i = 0; i < layout.segments; ++i) {
      Bits in(layout.n);
      for (int j = 0; j < layout.n; ++j) {
        auto bc = decode_bicertificate(
            z.slice_bits(layout.bc_offset(i, j), layout.bc_cell()), layout);
        if (!bc) return 0;  // condition 1
        int v = and_or_of(z, layout, i, j);
        if (v == 0) {  // condition 2: the zero half must certify
          int at = layout.add_offset(i, j, bc->zero_block);
          for (int b = 0; b < layout.n; ++b)
            if (z.get(at + b)) return 0;
        } else {  // condition 2: the one half must certify
          for (int b = 0; b < layout.n; ++b)
            if (!z.get(layout.add_offset(i, j) + bc->one_part[b])) return 0;
        }
        in.set(j, v);
      }
      if (!f.in_domain(in)) return 0;  // condition 3
      tg.set(i, f.evaluate(in));
    }
    return z.get(layout.dt_offset() + (int)tg.index());  // condition 4
  };
  return BooleanFunction::from_generator(std::move(spec));
}

Bits build_two_adaptive_instance(const BooleanFunction& f, const TwoAdaptiveLayout& layout,
                                 const std::vector<Bits>& in_values, const Bits& dt,
                                 std::uint64_t seed) {
  if ((int)in_values.size() != layout.segments)
    throw ArityMismatch("need one f-input per segment");
  if (dt.n != layout.dt_size()) throw ArityMismatch("data region has wrong width");
  Bits z(layout.arity());
  Rng rng = rng_stream(seed, 0x2ada);
  for (int i = 0; i < layout.segments; ++i) {
    if (in_values[i].n != layout.n || !f.in_domain(in_values[i]))
      throw ConstructionFailed("segment value outside the inner domain");
    for (int j = 0; j < layout.n; ++j) {
      Bicertificate bc;
      bc.zero_block = (int)rng_below(rng, (std::uint64_t)layout.n);
      bc.one_part.resize(layout.n);
      for (int b = 0; b < layout.n; ++b)
        bc.one_part[b] = b * layout.n + (int)rng_below(rng, (std::uint64_t)layout.n);
      z.set_range(layout.bc_offset(i, j), encode_bicertificate(bc, layout));
      int base = layout.add_offset(i, j);
      for (int b = 0; b < layout.n; ++b) z.set(base + bc.one_part[b], 1);
      z.set(base + bc.intersection(), in_values[i].get(j));
    }
  }
  z.set_range(layout.dt_offset(), dt);
  return z;
}

namespace {

std::int64_t need_param(const GenParams& ps, const char* key) {
  for (auto& [k, v] : ps)
    if (k == key) return v;
  throw ParseError(std::string("missing generator param: ") + key);
}

}  // namespace

void register_two_adaptive_generators() {
  BooleanFunction::register_generator("two-adaptive:dj", [](const GenParams& ps) {
    return make_two_adaptive(make_dj((int)need_param(ps, "n")),
                             (int)need_param(ps, "segments"), "dj");
  });
  BooleanFunction::register_generator("two-adaptive:forrelation", [](const GenParams& ps) {
    int inner_n = ceil_log2((std::uint64_t)need_param(ps, "n") / 2);
    return make_two_adaptive(make_forrelation(inner_n), (int)need_param(ps, "segments"),
                             "forrelation");
  });
}

}  // namespace qpar
