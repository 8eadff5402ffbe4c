#pragma once

#include <cmath>

#include "jpa/constants.hpp"

namespace jpa {

inline double db_from_ratio(double ratio) { return 10.0 * std::log10(ratio); }
inline double ratio_from_db(double db) { return std::pow(10.0, db / 10.0); }

inline double watt_to_dbm(double p_w) { return 10.0 * std::log10(p_w / 1e-3); }
inline double dbm_to_watt(double p_dbm) { return 1e-3 * std::pow(10.0, p_dbm / 10.0); }

// P = hbar * omega * |b|^2 with |b|^2 in photons/s.
inline double flux_to_watt(double flux, double omega) {
  return PhysConstants::hbar * omega * flux;
}
inline double watt_to_flux(double p_w, double omega) {
  return p_w / (PhysConstants::hbar * omega);
}

}  // namespace jpa
