#pragma once

#include <map>
#include <string>
#include <vector>

#include "sclaw/scenario.hpp"

namespace sclaw {

// ============================================================================
// Scenario runner: the full pipeline from a ScenarioSpec to CSV outputs,
// invariant checks, and a machine-readable report.
//
// Pipeline per run:
//   1. entropy solve of the conservation law on a shared fixed time step
//   2. mollification ladder: smoothed drift + smoothed initial density
//   3. per-path Monte Carlo with common random numbers across rungs:
//      characteristics (flow + inverse + conservative pushforward) against
//      a finite-volume continuity solve of the same realization
//   4. ensemble statistics, deterministic (zero-noise) reruns, commutator
//      decay, martingale certification, weak-residual refinement
//   5. CSV outputs + invariants.csv + report.txt + a re-runnable manifest
//
// Every number written to disk is a deterministic function of the spec, so
// rerunning the manifest reproduces each output byte for byte.
// ============================================================================

// Bounds for the checks that are part of the tool's contract rather than
// per-scenario tuning knobs.
inline constexpr double kSecondMomentRatioBound = 2.0;  // max/min over rungs
inline constexpr double kDetGrowthMin = 10.0;   // zero-noise L2 concentration
inline constexpr double kTranslationTol = 0.02; // constant-drift oracle, L1
inline constexpr double kDecaySlopeMin = 0.8;   // commutator rate, smooth drift
inline constexpr double kExactDecayTol = 1e-13; // "identically zero" commutator

struct InvariantCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string relation;  // "<=", ">=", ">"
    std::string detail;
};

struct RunReport {
    std::string scenario_name;
    std::string out_dir;
    std::vector<InvariantCheck> checks;
    std::map<std::string, double> metrics;

    bool all_passed() const;
    bool has_metric(const std::string& key) const;
    double metric(const std::string& key) const;  // throws if absent
};

struct RunOptions {
    std::string out_dir;  // created if missing; must be non-empty
    bool quiet = false;   // suppress per-check stdout lines
};

// Execute the scenario.  Throws std::invalid_argument if the spec fails
// validation and std::runtime_error on numerical contract violations
// (CFL, maximum principle, lost mass, flow inversion, ...).
RunReport run_scenario(const ScenarioSpec& spec, const RunOptions& opt);

// The text written to report.txt (deterministic; no timestamps).
std::string report_text(const ScenarioSpec& spec, const RunReport& report);

}  // namespace sclaw
