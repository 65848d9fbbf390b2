#include <fstream>
#include <string>

#include <json.hpp>

#include "opsim/error.hpp"
#include "opsim/op_engine.hpp"

namespace opsim {

namespace {

using nlohmann::json;

constexpr const char* kFormatName = "opsim-op-table";

json matrix(const OpTable& t, bool ci) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.interference_grid.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < t.distance_grid.size(); ++j) {
            if (ci) {
                row.push_back(t.ci_halfwidths[t.index(i, j)]);
            } else if (auto v = t.at(i, j)) {
                row.push_back(*v);
            } else {
                row.push_back(nullptr);
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

template <typename T>
T field_of(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::io, std::string("op table is missing '") + key + "'");
    return j.at(key).get<T>();
}

}  // namespace

void save_op_table(const OpTable& table, const std::filesystem::path& path) {
    const auto& m = table.meta;
    json doc;
    doc["format"] = kFormatName;
    doc["version"] = OpTable::kFormatVersion;
    doc["metadata"] = {
        {"field",
         {{"density", m.field.density},
          {"tx_power", m.field.tx_power},
          {"region_radius", m.field.region_radius},
          {"center", {m.field.center.x, m.field.center.y}}}},
        {"channel",
         {{"pathloss_exponent", m.channel.pathloss_exponent},
          {"reference_gain", m.channel.reference_gain},
          {"fading", to_string(m.channel.fading)},
          {"noise_power", m.channel.noise_power}}},
        {"access_threshold", m.access_threshold},
        {"desired_link_distance", m.desired_link_distance},
        {"conditioning",
         {{"bin_relative_halfwidth", m.conditioning.bin_relative_halfwidth},
          {"min_accepted_samples", m.conditioning.min_accepted_samples},
          {"max_total_samples", m.conditioning.max_total_samples}}},
        {"seed", m.seed},
    };
    doc["interference_grid"] = table.interference_grid;
    doc["distance_grid"] = table.distance_grid;
    doc["values"] = matrix(table, false);
    doc["ci_halfwidths"] = matrix(table, true);
    json absent = json::array();
    for (auto [i, j] : table.absent_cells()) absent.push_back({i, j});
    doc["absent_cells"] = std::move(absent);

    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write op table " + path.string());
    out << doc.dump(1) << '\n';
    if (!out) throw Error(ErrorCode::io, "failed writing op table " + path.string());
}

OpTable load_op_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot read op table " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io, "malformed op table " + path.string() + ": " + e.what());
    }

    try {
        if (field_of<std::string>(doc, "format") != kFormatName)
            throw Error(ErrorCode::io, "not an op table file: " + path.string());
        if (field_of<int>(doc, "version") != OpTable::kFormatVersion)
            throw Error(ErrorCode::io, "unsupported op table version in " + path.string());

        OpTable t;
        const json& meta = doc.at("metadata");
        const json& f = meta.at("field");
        t.meta.field.density = field_of<double>(f, "density");
        t.meta.field.tx_power = field_of<double>(f, "tx_power");
        t.meta.field.region_radius = field_of<double>(f, "region_radius");
        const auto center = field_of<std::vector<double>>(f, "center");
        if (center.size() != 2) throw Error(ErrorCode::io, "field center must have two coordinates");
        t.meta.field.center = {center[0], center[1]};
        const json& c = meta.at("channel");
        t.meta.channel.pathloss_exponent = field_of<double>(c, "pathloss_exponent");
        t.meta.channel.reference_gain = field_of<double>(c, "reference_gain");
        t.meta.channel.fading = parse_fading(field_of<std::string>(c, "fading"));
        t.meta.channel.noise_power = field_of<double>(c, "noise_power");
        t.meta.access_threshold = field_of<double>(meta, "access_threshold");
        t.meta.desired_link_distance = field_of<double>(meta, "desired_link_distance");
        const json& cond = meta.at("conditioning");
        t.meta.conditioning.bin_relative_halfwidth = field_of<double>(cond, "bin_relative_halfwidth");
        t.meta.conditioning.min_accepted_samples = field_of<std::uint64_t>(cond, "min_accepted_samples");
        t.meta.conditioning.max_total_samples = field_of<std::uint64_t>(cond, "max_total_samples");
        t.meta.seed = field_of<std::uint64_t>(meta, "seed");

        t.interference_grid = field_of<std::vector<double>>(doc, "interference_grid");
        t.distance_grid = field_of<std::vector<double>>(doc, "distance_grid");
        const json& vals = doc.at("values");
        const json& cis = doc.at("ci_halfwidths");
        const std::size_t n_i = t.interference_grid.size();
        const std::size_t n_d = t.distance_grid.size();
        if (vals.size() != n_i || cis.size() != n_i)
            throw Error(ErrorCode::io, "op table matrix row count does not match interference_grid");
        for (std::size_t i = 0; i < n_i; ++i) {
            if (vals[i].size() != n_d || cis[i].size() != n_d)
                throw Error(ErrorCode::io, "op table matrix column count does not match distance_grid");
            for (std::size_t j = 0; j < n_d; ++j) {
                if (vals[i][j].is_null())
                    t.values.emplace_back(std::nullopt);
                else
                    t.values.emplace_back(vals[i][j].get<double>());
                t.ci_halfwidths.push_back(cis[i][j].get<double>());
            }
        }
        const auto absent = doc.at("absent_cells").get<std::vector<std::vector<std::size_t>>>();
        if (absent.size() != t.absent_cells().size())
            throw Error(ErrorCode::io, "absent_cells list disagrees with null values");
        t.validate();
        return t;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io, "malformed op table " + path.string() + ": " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io) throw;
        throw Error(ErrorCode::io, "invalid op table " + path.string() + ": " + e.what());
    }
}

}  // namespace opsim
