#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sclaw/grid.hpp"

namespace sclaw {

// ============================================================================
// Scenario descriptions: the flat key-value config format, validation,
// shipped presets, and the catalog.
// ============================================================================

struct InitialData {
    enum class Kind { riemann, bump, constant };
    Kind kind = Kind::constant;
    // riemann
    double left = 0.0, right = 0.0, jump_at = 0.0;
    // bump
    double center = 0.0, width = 1.0, height = 0.0;
    // constant
    double value = 0.0;
};

// Evaluate the initial profile at a point.
double initial_value(const InitialData& d, double x);
// Support interval [lo, hi]; unbounded data reports +-infinity.
void initial_support(const InitialData& d, double& lo, double& hi);

struct Tolerances {
    double mass_tol = 1e-3;        // relative mass drift allowed per path/snapshot
    double cross_tol = 0.05;       // L1 between pushforward and finite-volume, per path
    double quadrature_coeff = 1.0; // residual tolerance = coeff * (dx + dt)
    double ci_multiplier = 3.0;    // standard-error multiple for Monte Carlo checks
};

struct ScenarioSpec {
    std::string name;
    std::string description;
    std::string flux_label = "burgers";
    InitialData v0;   // defaults set in make_default_spec()
    InitialData u0;
    double x_min = -8.0;
    double x_max = 10.0;
    int n_cells = 1200;
    double t_end = 1.0;
    double cfl = 0.5;
    std::vector<double> epsilon_ladder_dx = {8.0, 4.0, 2.0, 1.0};  // units of dx
    int n_paths = 400;
    std::uint64_t base_seed = 1234567891ull;
    std::vector<std::string> outputs;
    Tolerances tol;
    bool flow_dumps = false;

    Grid1D grid() const { return Grid1D{x_min, x_max, n_cells}; }
    double dx() const { return grid().dx(); }
};

// Spec with every field at its documented default (v0 = riemann(1,0) at 0,
// u0 = bump(-0.45, 0.15, 0.12), standard outputs).  `name` stays empty.
ScenarioSpec make_default_spec();

// Names accepted in outputs.list.
const std::vector<std::string>& known_outputs();

struct ValidationIssue {
    int line = 0;  // 1-based line in the source file; 0 = cross-field check
    std::string message;
};

struct ParseResult {
    std::optional<ScenarioSpec> spec;  // engaged only when errors is empty
    std::vector<ValidationIssue> errors;
};

// Parse + validate scenario text.  All problems are collected, not just the
// first; `origin` names the source in messages.
ParseResult parse_scenario_text(const std::string& text, const std::string& origin);

// Load from disk; a missing/unreadable file is reported as a single error.
ParseResult load_scenario(const std::string& path);

// Semantic validation of an already-built spec (used by parse and by preset
// self-checks).  Line numbers are 0.
std::vector<ValidationIssue> validate_spec(const ScenarioSpec& spec);

// Serialize a spec to the key-value format; parsing the result reproduces
// the spec exactly.  Used for the run manifest.
std::string scenario_to_text(const ScenarioSpec& spec);

// ---------------------------------------------------------------------------
// Presets and catalog
// ---------------------------------------------------------------------------

const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
ScenarioSpec preset(const std::string& name);  // throws on unknown name

struct CatalogEntry {
    std::string name;
    std::string description;
    bool builtin = true;
    std::string file;     // empty for builtins
    std::string warning;  // parse problem summary for corrupt user files
};

// Shipped presets plus any *.scn files under scenario_dir (which may not
// exist).  Corrupt user files stay listed, with a warning attached.
std::vector<CatalogEntry> list_scenarios(const std::string& scenario_dir);

}  // namespace sclaw
