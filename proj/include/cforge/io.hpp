#pragma once

#include "cforge/applications.hpp"
#include "cforge/cartan.hpp"
#include "cforge/gcr.hpp"
#include "cforge/lca.hpp"
#include "cforge/realize.hpp"
#include "cforge/weak.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cforge::io {

using json = nlohmann::json;

// Point-major table of doubles on a grid. This is the common on-disk shape of
// every field: a CSV with one row per grid point (coordinates x0.., then the
// components in `components` order) and a JSON header with the grid, the
// component names and whatever the field type needs in `meta`.
struct FieldTable {
    Grid grid;
    std::string kind;
    std::vector<std::string> components;
    std::vector<double> values;
    json meta = json::object();

    std::size_t ncomp() const { return components.size(); }
    double at(std::size_t p, std::size_t c) const { return values[p * ncomp() + c]; }
};

json grid_to_json(const Grid& g);
Grid grid_from_json(const json& j);

json header_json(const FieldTable& t);
void write_csv(std::ostream& os, const FieldTable& t);
// Rebuilds a table from its header and CSV body; checks the row and column
// counts and that the coordinate columns match the grid.
FieldTable read_table(const json& header, std::istream& csv);

// <stem>.json and <stem>.csv.
void save_field(const FieldTable& t, const std::filesystem::path& stem);
FieldTable load_field(const std::filesystem::path& stem);

// Component order: matrices row major ("m_i_j"); forms by increasing
// multi-index, then the matrix block row major ("w_a_b:i_j" for a 2-form).
FieldTable to_table(const ScalarField& f);
FieldTable to_table(const VectorField& f);
FieldTable to_table(const MatrixField& f);
FieldTable to_table(const FormField& f);
FieldTable to_table(const MetricData& g);
FieldTable to_table(const ConnectionForm& w);
FieldTable to_table(const Immersion& f);

ScalarField scalar_field(const FieldTable& t);
VectorField vector_field(const FieldTable& t);
MatrixField matrix_field(const FieldTable& t);
FormField form_field(const FieldTable& t);
MetricData metric_data(const FieldTable& t);
ConnectionForm connection_form(const FieldTable& t);

// Wavefront style mesh of a 2D chart: "v x y z" per grid point in flat
// order (first three ambient coordinates, zero padded), then "f a b c d"
// per cell with 1-based indices around (i,j) (i+1,j) (i+1,j+1) (i,j+1).
void write_obj(std::ostream& os, const Immersion& f);

json norms_json(const Norms& n);
json equivalence_json(const EquivalenceReport& r);
json roundtrip_json(const RoundtripReport& r);

// eps,pairing,error,points
void write_weak_csv(std::ostream& os, const WeakLimitReport& r);
json weak_summary_json(const WeakLimitReport& r, bool pass);
// label,low_mass,pairing,error
void write_lca_csv(std::ostream& os, const LcaReport& r);
json lca_summary_json(const LcaReport& r, bool pass);

// {"orders": [..], "dim_in": a, "dim_out": b,
//  "table": [ per dual element in flat order: dim_out rows of dim_in [re, im] ]}
json multiplier_to_json(const FiniteAbelianGroup& G, const Multiplier& m);
Multiplier multiplier_from_json(const json& j, const FiniteAbelianGroup& G);
FiniteAbelianGroup group_from_json(const json& j);

// Either {"box_radius": r} or {"low": [flat..], "target": [flat or -1 ..]}.
json retraction_to_json(const Retraction& r);
Retraction retraction_from_json(const json& j, const FiniteAbelianGroup& G);

// {"name": s, "N": n, "entries": [{"I": i, "J": j, "K": k, "A": 4x4 rows}]};
// entries not listed are zero.
json null_form_to_json(const NullFormCoefficients& A);
NullFormCoefficients null_form_from_json(const json& j);

json read_json_file(const std::filesystem::path& p);

} // namespace cforge::io
