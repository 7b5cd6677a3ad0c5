#pragma once

#include <string>

#include "mlsep/analysis.hpp"
#include "mlsep/dynamics.hpp"
#include "mlsep/flux.hpp"
#include "mlsep/kernels.hpp"
#include "mlsep/lattice.hpp"
#include "mlsep/measures.hpp"

namespace mlsep {

// Config <-> JSON object {"geometry": {...}, "lanes": ["0101...", ...]};
// bitstrings run leftmost column first.
std::string config_to_json(const Config& c);
Config config_from_json(const std::string& json);

std::string geometry_to_json(const LaneGeometry& g);
LaneGeometry geometry_from_json(const std::string& json);

// "LxN:periodic|closed[:torus]" shorthand, e.g. "256x2:periodic"
LaneGeometry parse_geometry(const std::string& text);

// MeasureSpec <-> tagged JSON object {"type": ..., ...}
std::string measure_to_json(const MeasureSpec& spec);
MeasureSpec measure_from_json(const std::string& json);

std::string kernel_to_json(const RateKernel& k);
RateKernel kernel_from_json(const std::string& json);

std::string stationarity_report_to_json(const StationarityReport& rep);
std::string rotation_report_to_json(const RotationReport& rep);
std::string suite_result_to_json(const SuiteResult& res);
std::string classification_to_json(const R0Classification& cls, double rho_star, bool have_rho_star,
                                   const ZMembership* z);

// one JSONL record per snapshot
std::string snapshot_to_jsonl(int replica, const Snapshot& snap);

// numbers rendered with enough digits to round-trip
std::string format_double(double v);

}  // namespace mlsep
