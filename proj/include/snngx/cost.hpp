#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "snngx/errors.hpp"

namespace snngx::hw {

/// Decryption cost constants. RD (random decryption) rewrites the RRAM cells
/// to decrypt; GD (genetic decryption) decrypts on read through the decryptor
/// unit, overlapping computation.
struct CostModel {
  double e_write_pj = 1.0;      // energy per RRAM program, pJ/bit
  double t_write_ns = 100.43;   // single program pulse
  double parallel_writes = 1024;  // 2^10 simultaneous rewrites
  double e_decrypt_pj = 14.75;  // decryptor energy, pJ per decryption per bit
  double f_gd_mhz = 25.0;       // decryptor module clock
  double f_rd_mhz = 10.0;       // rewrite clock backing t_write

  void validate() const {
    if (!(e_write_pj > 0 && t_write_ns > 0 && parallel_writes > 0 && e_decrypt_pj > 0 &&
          f_gd_mhz > 0 && f_rd_mhz > 0))
      throw validation_error("CostModel: all constants must be > 0");
  }
};

struct CostBreakdown {
  double e_rd_pj = 0.0;
  double e_gd_pj = 0.0;
  double energy_factor = 0.0;
  double t_rd_ns = 0.0;
  double t_gd_ns = 0.0;
  double latency_factor = 0.0;
};

/// RD pays one rewrite per encrypted bit (energy) and one write pulse per wave
/// of `parallel_writes` bits (latency). GD pays the decryptor energy per bit
/// per decryption and a single decryptor cycle of latency, since decryption
/// overlaps computation.
inline CostBreakdown estimate_cost(double bits_random, double bits_snngx,
                                   double decryptions_per_inference = 1.0,
                                   const CostModel& model = {}) {
  model.validate();
  if (!(bits_random > 0 && bits_snngx > 0 && decryptions_per_inference > 0))
    throw validation_error("estimate_cost: counts must be > 0");
  CostBreakdown c;
  c.e_rd_pj = bits_random * model.e_write_pj;
  c.t_rd_ns = std::ceil(bits_random / model.parallel_writes) * model.t_write_ns;
  c.e_gd_pj = bits_snngx * model.e_decrypt_pj * decryptions_per_inference;
  c.t_gd_ns = 1e3 / model.f_gd_mhz;
  c.energy_factor = c.e_rd_pj / c.e_gd_pj;
  c.latency_factor = c.t_rd_ns / c.t_gd_ns;
  return c;
}

struct CostRow {
  std::string label;
  double bits_random = 0.0;
  double bits_snngx = 0.0;
  CostBreakdown cost;
};

}  // namespace snngx::hw
