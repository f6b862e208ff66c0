#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qpar/boolfn.hpp"

namespace qpar {

// An ordered list of (bit index, asserted value) pairs over one inner input.
struct Certificate {
  std::vector<std::pair<int, int>> entries;
};

// Fixed-width cell encoding: entry count, then (index, value) per entry,
// streamed little-endian and zero-padded to the cell size.
struct CertificateFormat {
  int index_bits = 0;
  int count_bits = 16;
  static CertificateFormat for_arity(int inner_arity);
  int entry_bits() const { return index_bits + 1; }
};

// One encoded stream holding `copies` certificates back to back.
Bits encode_certificates(const std::vector<Certificate>& certs, const CertificateFormat& fmt,
                         int width);
// Rejects out-of-range or duplicate indices, counts that overflow the cell,
// and nonzero padding. nullopt = the cell holds no well-formed certificates.
std::optional<std::vector<Certificate>> decode_certificates(const Bits& cell,
                                                            const CertificateFormat& fmt,
                                                            int copies, int inner_arity);

struct CheatSheetLayout {
  int inner_arity = 0;  // F
  int copies = 0;       // c
  int cell_size = 0;    // M
  int cells() const { return 1 << copies; }
  int arity() const { return copies * inner_arity + cell_size * cells(); }
  int copy_offset(int i) const { return i * inner_arity; }
  int cell_offset(int l) const { return copies * inner_arity + l * cell_size; }
  Bits copy_bits(const Bits& z, int i) const { return z.slice_bits(copy_offset(i), inner_arity); }
  Bits cell_bits(const Bits& z, int l) const { return z.slice_bits(cell_offset(l), cell_size); }
};

// Does fixing the certified coordinates force every completion into the
// domain with output v? This is the strong reading: a subcube with any
// out-of-domain completion certifies nothing.
bool certificate_forces(const BooleanFunction& f, const Certificate& cert, int v);

using CertChecker =
    std::function<bool(const Bits& cell, const std::vector<Bits>& copies, const Bits& ell)>;

// Verifier used by the lifted function: decode the cell, match every asserted
// bit against the address copies, and require forcing of both domain
// membership and the claimed outputs.
CertChecker default_cert_checker(const BooleanFunction& f_inner, const CheatSheetLayout& layout);

// Totalization of a partial f_inner: c address copies plus 2^c data cells;
// output 1 iff every copy is in-domain and the cell indexed by the copy
// outputs holds a certificate for exactly that. All-zero cells never certify.
BooleanFunction make_cheatsheet(const BooleanFunction& f_inner, int c, int cell_size,
                                CertChecker checker = nullptr);

// cell_size 0 picks the smallest size that fits full-assignment certificates.
int default_cell_size(int inner_arity, int copies);

// The lift applied to f composed with AND-of-ORs, one per input bit of f.
BooleanFunction make_canonical_cheatsheet(const BooleanFunction& f, int ao_blocks,
                                          int ao_block_size, int c, int cell_size = 0);
BooleanFunction make_ccs_dj(int n, int ao_blocks, int ao_block_size, int c, int cell_size = 0);
BooleanFunction make_ccs_for(int n, int ao_blocks, int ao_block_size, int c, int cell_size = 0);

CheatSheetLayout canonical_cheatsheet_layout(int f_arity, int ao_blocks, int ao_block_size, int c,
                                             int cell_size = 0);

// Builds a full input for the lifted function from in-domain address copies:
// the indexed cell gets full-assignment certificates, every other cell is
// zero. With valid_cert = false the indexed cell is zeroed too.
Bits build_cheatsheet_input(const BooleanFunction& f_inner, const CheatSheetLayout& layout,
                            const std::vector<Bits>& copies, bool valid_cert = true);

// Witness input whose disjoint blocks all flip the lifted function, plus the
// per-block reason: 0 = inner input leaves the domain, 1 = the cell address
// moves to a spurious cell, 2 = the stored certificate stops matching.
struct BsWitness {
  BooleanFunction fcs;
  CheatSheetLayout layout;
  Bits input;
  std::vector<Bits> blocks;  // masks over the full lifted input
  std::vector<int> cases;
};

BsWitness build_block_sensitivity_witness(const BooleanFunction& g, const BooleanFunction& h,
                                          int c, std::vector<Bits> z_choices = {});

void register_cheatsheet_generators();

}  // namespace qpar
