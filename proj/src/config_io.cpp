#include "opsim/config_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "opsim/error.hpp"
#include "opsim/format.hpp"

namespace opsim {

namespace {

constexpr double kBoltzmann = 1.380649e-23;
constexpr double kReferenceTemperature = 290.0;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

}  // namespace

double parse_quantity(std::string_view text, Quantity kind) {
    std::string_view s = trim(text);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc())
        throw Error(ErrorCode::invalid_argument, "expected a number, got '" + std::string(text) + "'");
    const std::string unit(trim(std::string_view(ptr, s.data() + s.size() - ptr)));
    if (unit.empty()) return value;

    const auto wrong_unit = [&] {
        return Error(ErrorCode::invalid_argument, "unit '" + unit + "' is not valid here");
    };
    switch (kind) {
        case Quantity::ratio:
            if (unit == "dB") return std::pow(10.0, value / 10.0);
            break;
        case Quantity::power:
            if (unit == "W") return value;
            if (unit == "mW") return value * 1e-3;
            if (unit == "dBW") return std::pow(10.0, value / 10.0);
            if (unit == "dBm") return std::pow(10.0, (value - 30.0) / 10.0);
            break;
        case Quantity::time:
            if (unit == "s") return value;
            if (unit == "ms") return value * 1e-3;
            if (unit == "us") return value * 1e-6;
            break;
        case Quantity::frequency:
            if (unit == "Hz") return value;
            if (unit == "kHz") return value * 1e3;
            if (unit == "MHz") return value * 1e6;
            if (unit == "GHz") return value * 1e9;
            break;
        case Quantity::plain:
            break;
    }
    throw wrong_unit();
}

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& key, const YAML::Node& node, const std::string& msg) const {
        throw ConfigError(key, where(key, node) + msg);
    }

    std::string where(const std::string& key, const YAML::Node& node) const {
        const int line = node.IsDefined() ? node.Mark().line : -1;
        if (line >= 0) return source_ + ":" + std::to_string(line + 1) + ": " + key + ": ";
        return source_ + ": " + key + " (override): ";
    }

    std::string where(const std::string& key) const {
        auto it = lines_.find(key);
        if (it != lines_.end()) return source_ + ":" + std::to_string(it->second + 1) + ": ";
        return source_ + ": ";
    }

    YAML::Node section(const YAML::Node& parent, const std::string& base, const char* name,
                       std::initializer_list<const char*> allowed) {
        const std::string key = join(base, name);
        YAML::Node n = parent[name];
        if (!n.IsDefined() || n.IsNull()) return YAML::Node(YAML::NodeType::Map);
        if (!n.IsMap()) fail(key, n, "expected a mapping");
        remember(key, n);
        check_keys(n, key, allowed);
        return n;
    }

    void check_keys(const YAML::Node& map, const std::string& base, std::initializer_list<const char*> allowed) {
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& kv : map) {
            const auto name = kv.first.as<std::string>();
            if (!ok.count(name)) fail(join(base, name), kv.first, "unknown key");
            remember(join(base, name), kv.first);
        }
    }

    template <typename T>
    void scalar(const YAML::Node& parent, const std::string& base, const char* name, T& out) {
        const YAML::Node n = parent[name];
        if (!n.IsDefined() || n.IsNull()) return;
        const std::string key = join(base, name);
        if (!n.IsScalar()) fail(key, n, "expected a scalar");
        try {
            out = n.as<T>();
        } catch (const YAML::Exception&) {
            fail(key, n, "cannot interpret '" + n.Scalar() + "'");
        }
    }

    double to_quantity(const YAML::Node& n, const std::string& key, Quantity kind) const {
        if (!n.IsScalar()) fail(key, n, "expected a number");
        try {
            return parse_quantity(n.Scalar(), kind);
        } catch (const Error& e) {
            fail(key, n, e.what());
        }
    }

    void quantity(const YAML::Node& parent, const std::string& base, const char* name, double& out,
                  Quantity kind = Quantity::plain) {
        const YAML::Node n = parent[name];
        if (!n.IsDefined() || n.IsNull()) return;
        out = to_quantity(n, join(base, name), kind);
    }

    bool has(const YAML::Node& parent, const char* name) const {
        const YAML::Node n = parent[name];
        return n.IsDefined() && !n.IsNull();
    }

    Point point(const YAML::Node& n, const std::string& key) const {
        if (!n.IsSequence() || n.size() != 2) fail(key, n, "expected [x, y]");
        return {to_quantity(n[0], key, Quantity::plain), to_quantity(n[1], key, Quantity::plain)};
    }

    template <typename E, typename F>
    void enumeration(const YAML::Node& parent, const std::string& base, const char* name, E& out, F parse) {
        const YAML::Node n = parent[name];
        if (!n.IsDefined() || n.IsNull()) return;
        const std::string key = join(base, name);
        if (!n.IsScalar()) fail(key, n, "expected a name");
        try {
            out = parse(n.Scalar());
        } catch (const Error& e) {
            fail(key, n, e.what());
        }
    }

    void remember(const std::string& key, const YAML::Node& n) {
        if (n.Mark().line >= 0) lines_.emplace(key, n.Mark().line);
    }

private:
    std::string source_;
    std::map<std::string, int> lines_;
};

void apply_override(YAML::Node& root, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError(spec, "override '" + spec + "' must look like key.path=value");
    const std::string key = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);

    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) throw ConfigError(key, "override key '" + key + "' has an empty segment");
        parts.push_back(part);
    }

    YAML::Node cur = root;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& seg = parts[i];
        const bool last = i + 1 == parts.size();
        YAML::Node next;
        if (cur.IsSequence()) {
            std::size_t idx = 0;
            auto [p, ec] = std::from_chars(seg.data(), seg.data() + seg.size(), idx);
            if (ec != std::errc() || p != seg.data() + seg.size() || idx >= cur.size())
                throw ConfigError(key, "override key '" + key + "': no element '" + seg + "'");
            next.reset(cur[idx]);
        } else {
            if (!cur.IsMap() && !cur.IsNull())
                throw ConfigError(key, "override key '" + key + "' descends into a scalar");
            if (last) {
                cur[seg] = YAML::Load(value);
                return;
            }
            if (!cur[seg].IsDefined() || cur[seg].IsNull()) cur[seg] = YAML::Node(YAML::NodeType::Map);
            next.reset(cur[seg]);
        }
        if (last) {
            next = YAML::Load(value);
            return;
        }
        cur.reset(next);
    }
}

ScenarioConfig read_scenario(const YAML::Node& root, Reader& r) {
    ScenarioConfig cfg;
    r.check_keys(root, "", {"link", "channel", "field", "pairs", "gains", "sensors", "primary", "policy",
                            "access_mode", "duplex", "timing", "op_source", "run", "overhead"});

    const auto link = r.section(root, "", "link", {"access_threshold", "bandwidth_hz", "mutual_interference"});
    r.quantity(link, "link", "access_threshold", cfg.link.access_threshold, Quantity::ratio);
    r.quantity(link, "link", "bandwidth_hz", cfg.link.bandwidth_hz, Quantity::frequency);
    r.quantity(link, "link", "mutual_interference", cfg.link.mutual_interference, Quantity::ratio);

    const auto ch = r.section(root, "", "channel", {"pathloss_exponent", "reference_gain", "fading", "noise_power"});
    r.quantity(ch, "channel", "pathloss_exponent", cfg.channel.pathloss_exponent);
    r.quantity(ch, "channel", "reference_gain", cfg.channel.reference_gain, Quantity::ratio);
    r.enumeration(ch, "channel", "fading", cfg.channel.fading, parse_fading);
    cfg.channel.noise_power = kBoltzmann * kReferenceTemperature * cfg.link.bandwidth_hz;
    r.quantity(ch, "channel", "noise_power", cfg.channel.noise_power, Quantity::power);

    const auto fl = r.section(root, "", "field", {"density", "tx_power", "region_radius", "center"});
    r.quantity(fl, "field", "density", cfg.field.density);
    r.quantity(fl, "field", "tx_power", cfg.field.tx_power, Quantity::power);
    r.quantity(fl, "field", "region_radius", cfg.field.region_radius);
    if (r.has(fl, "center")) cfg.field.center = r.point(fl["center"], "field.center");

    const YAML::Node pairs = root["pairs"];
    if (!pairs.IsDefined() || pairs.IsNull()) r.fail("pairs", root, "missing required field");
    if (!pairs.IsSequence()) r.fail("pairs", pairs, "expected a list of pairs");
    r.remember("pairs", pairs);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string base = "pairs." + std::to_string(i);
        const YAML::Node p = pairs[i];
        if (!p.IsMap()) r.fail(base, p, "expected a mapping");
        r.remember(base, p);
        r.check_keys(p, base, {"a", "b", "op_a", "op_b", "external_a", "external_b"});
        PairSpec spec;
        if (r.has(p, "a")) spec.pos_a = r.point(p["a"], base + ".a");
        if (r.has(p, "b")) spec.pos_b = r.point(p["b"], base + ".b");
        if (r.has(p, "op_a")) {
            double v = 0.0;
            r.quantity(p, base, "op_a", v);
            spec.op_a = v;
        }
        if (r.has(p, "op_b")) {
            double v = 0.0;
            r.quantity(p, base, "op_b", v);
            spec.op_b = v;
        }
        r.quantity(p, base, "external_a", spec.external_a, Quantity::power);
        r.quantity(p, base, "external_b", spec.external_b, Quantity::power);
        cfg.pairs.push_back(spec);
    }

    if (r.has(root, "gains")) {
        const YAML::Node g = root["gains"];
        if (!g.IsSequence()) r.fail("gains", g, "expected a list of rows");
        r.remember("gains", g);
        const std::size_t n = g.size();
        GainMatrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::string key = "gains." + std::to_string(i);
            if (!g[i].IsSequence() || g[i].size() != n) r.fail(key, g[i], "each row needs " + std::to_string(n) + " entries");
            for (std::size_t j = 0; j < n; ++j) {
                r.remember(key + "." + std::to_string(j), g[i][j]);
                m(i, j) = r.to_quantity(g[i][j], key + "." + std::to_string(j), Quantity::ratio);
            }
        }
        cfg.gains = m;
    }

    if (r.has(root, "sensors")) {
        const YAML::Node s = root["sensors"];
        if (!s.IsSequence()) r.fail("sensors", s, "expected a list of [x, y]");
        r.remember("sensors", s);
        for (std::size_t i = 0; i < s.size(); ++i)
            cfg.sensors.push_back(r.point(s[i], "sensors." + std::to_string(i)));
    }

    const auto pr = r.section(root, "", "primary", {"enabled", "position", "rx_position", "tx_power",
                                                    "transmit_probability", "decision_period", "sinr_threshold"});
    r.scalar(pr, "primary", "enabled", cfg.primary.enabled);
    if (r.has(pr, "position")) {
        cfg.primary.position = r.point(pr["position"], "primary.position");
        cfg.primary.rx_position = {cfg.primary.position.x + 5.0, cfg.primary.position.y};
    }
    if (r.has(pr, "rx_position")) cfg.primary.rx_position = r.point(pr["rx_position"], "primary.rx_position");
    r.quantity(pr, "primary", "tx_power", cfg.primary.tx_power, Quantity::power);
    r.quantity(pr, "primary", "transmit_probability", cfg.primary.transmit_probability);
    r.quantity(pr, "primary", "decision_period", cfg.primary.decision_period, Quantity::time);
    r.quantity(pr, "primary", "sinr_threshold", cfg.primary.sinr_threshold, Quantity::ratio);

    const auto po = r.section(root, "", "policy", {"kind", "c", "tau", "beta", "max_power"});
    r.enumeration(po, "policy", "kind", cfg.policy.kind, parse_policy_kind);
    r.quantity(po, "policy", "c", cfg.policy.concave_curvature);
    r.quantity(po, "policy", "tau", cfg.policy.deterministic_threshold);
    r.quantity(po, "policy", "beta", cfg.policy.beta);
    r.quantity(po, "policy", "max_power", cfg.policy.max_power, Quantity::power);

    r.enumeration(root, "", "access_mode", cfg.access_mode, parse_access_mode);

    const auto dx = r.section(root, "", "duplex", {"enabled", "si_residual", "rate_model", "hd_scheme"});
    r.scalar(dx, "duplex", "enabled", cfg.duplex.enabled);
    r.quantity(dx, "duplex", "si_residual", cfg.duplex.si_residual, Quantity::ratio);
    r.enumeration(dx, "duplex", "rate_model", cfg.duplex.rate_model, parse_rate_model);
    r.enumeration(dx, "duplex", "hd_scheme", cfg.duplex.hd_scheme, parse_hd_scheme);

    const auto tm = r.section(root, "", "timing", {"slot", "sensing_period", "feedback_period", "op_read_period",
                                                   "field_redraw_period", "control_delays"});
    r.quantity(tm, "timing", "slot", cfg.timing.slot, Quantity::time);
    r.quantity(tm, "timing", "sensing_period", cfg.timing.sensing_period, Quantity::time);
    r.quantity(tm, "timing", "feedback_period", cfg.timing.feedback_period, Quantity::time);
    r.quantity(tm, "timing", "op_read_period", cfg.timing.op_read_period, Quantity::time);
    r.quantity(tm, "timing", "field_redraw_period", cfg.timing.field_redraw_period, Quantity::time);
    const auto cd = r.section(tm, "timing", "control_delays", {"feedback", "uplink", "compute", "downlink", "apply"});
    auto& d = cfg.timing.control_delays;
    r.quantity(cd, "timing.control_delays", "feedback", d.feedback, Quantity::time);
    r.quantity(cd, "timing.control_delays", "uplink", d.uplink, Quantity::time);
    r.quantity(cd, "timing.control_delays", "compute", d.compute, Quantity::time);
    r.quantity(cd, "timing.control_delays", "downlink", d.downlink, Quantity::time);
    r.quantity(cd, "timing.control_delays", "apply", d.apply, Quantity::time);

    const auto os = r.section(root, "", "op_source", {"kind", "table", "desired_link_distance", "conditioning", "grid"});
    r.enumeration(os, "op_source", "kind", cfg.op_source.kind, parse_op_source_kind);
    r.scalar(os, "op_source", "table", cfg.op_source.table_path);
    r.quantity(os, "op_source", "desired_link_distance", cfg.op_source.desired_link_distance);
    const auto cond = r.section(os, "op_source", "conditioning", {"epsilon", "min_accepted", "max_total"});
    r.quantity(cond, "op_source.conditioning", "epsilon", cfg.op_source.conditioning.bin_relative_halfwidth);
    r.scalar(cond, "op_source.conditioning", "min_accepted", cfg.op_source.conditioning.min_accepted_samples);
    r.scalar(cond, "op_source.conditioning", "max_total", cfg.op_source.conditioning.max_total_samples);
    const auto grid = r.section(os, "op_source", "grid", {"interference_points", "distance_points"});
    r.scalar(grid, "op_source.grid", "interference_points", cfg.op_source.interference_points);
    r.scalar(grid, "op_source.grid", "distance_points", cfg.op_source.distance_points);

    const auto rn = r.section(root, "", "run", {"slots", "seed"});
    r.scalar(rn, "run", "slots", cfg.run.slots);
    r.scalar(rn, "run", "seed", cfg.run.seed);

    const auto oh = r.section(root, "", "overhead", {"cp_fraction", "pss_fraction", "rs_fraction"});
    r.quantity(oh, "overhead", "cp_fraction", cfg.overhead.cp_fraction);
    r.quantity(oh, "overhead", "pss_fraction", cfg.overhead.pss_fraction);
    r.quantity(oh, "overhead", "rs_fraction", cfg.overhead.rs_fraction);

    return cfg;
}

}  // namespace

ScenarioConfig parse_scenario_text(std::string_view text, std::span<const std::string> overrides,
                                   const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError("", source + ":" + std::to_string(e.mark.line + 1) + ": parse error: " + e.msg);
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("", source + ": top level must be a mapping");

    for (const auto& o : overrides) {
        try {
            apply_override(root, o);
        } catch (const YAML::Exception& e) {
            throw ConfigError(o, source + ": override '" + o + "': " + e.msg);
        }
    }

    Reader reader(source);
    ScenarioConfig cfg;
    try {
        cfg = read_scenario(root, reader);
    } catch (const YAML::Exception& e) {
        throw ConfigError("", source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(e.key(), reader.where(e.key()) + e.what());
    }
    return cfg;
}

ScenarioConfig parse_scenario(const std::filesystem::path& path, std::span<const std::string> overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), overrides, path.string());
}

namespace {

std::string num(double v) { return format_double(v); }

std::string pt(Point p) { return "[" + num(p.x) + ", " + num(p.y) + "]"; }

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string emit_scenario(const ScenarioConfig& cfg) {
    std::ostringstream o;
    o << "link:\n"
      << "  access_threshold: " << num(cfg.link.access_threshold) << "\n"
      << "  bandwidth_hz: " << num(cfg.link.bandwidth_hz) << "\n"
      << "  mutual_interference: " << num(cfg.link.mutual_interference) << "\n";
    o << "channel:\n"
      << "  pathloss_exponent: " << num(cfg.channel.pathloss_exponent) << "\n"
      << "  reference_gain: " << num(cfg.channel.reference_gain) << "\n"
      << "  fading: " << to_string(cfg.channel.fading) << "\n"
      << "  noise_power: " << num(cfg.channel.noise_power) << "\n";
    o << "field:\n"
      << "  density: " << num(cfg.field.density) << "\n"
      << "  tx_power: " << num(cfg.field.tx_power) << "\n"
      << "  region_radius: " << num(cfg.field.region_radius) << "\n"
      << "  center: " << pt(cfg.field.center) << "\n";
    o << "pairs:\n";
    for (const auto& p : cfg.pairs) {
        std::string lead = "  - ";
        auto line = [&](const std::string& s) {
            o << lead << s << "\n";
            lead = "    ";
        };
        if (p.pos_a) line("a: " + pt(*p.pos_a));
        if (p.pos_b) line("b: " + pt(*p.pos_b));
        if (p.op_a) line("op_a: " + num(*p.op_a));
        if (p.op_b) line("op_b: " + num(*p.op_b));
        line("external_a: " + num(p.external_a));
        line("external_b: " + num(p.external_b));
    }
    if (cfg.gains) {
        o << "gains:\n";
        for (std::size_t i = 0; i < cfg.gains->tx_count(); ++i) {
            o << "  - [";
            for (std::size_t j = 0; j < cfg.gains->rx_count(); ++j) o << (j ? ", " : "") << num((*cfg.gains)(i, j));
            o << "]\n";
        }
    }
    if (cfg.sensors.empty()) {
        o << "sensors: []\n";
    } else {
        o << "sensors:\n";
        for (const auto& s : cfg.sensors) o << "  - " << pt(s) << "\n";
    }
    o << "primary:\n"
      << "  enabled: " << (cfg.primary.enabled ? "true" : "false") << "\n"
      << "  position: " << pt(cfg.primary.position) << "\n"
      << "  rx_position: " << pt(cfg.primary.rx_position) << "\n"
      << "  tx_power: " << num(cfg.primary.tx_power) << "\n"
      << "  transmit_probability: " << num(cfg.primary.transmit_probability) << "\n"
      << "  decision_period: " << num(cfg.primary.decision_period) << "\n"
      << "  sinr_threshold: " << num(cfg.primary.sinr_threshold) << "\n";
    o << "policy:\n"
      << "  kind: " << to_string(cfg.policy.kind) << "\n"
      << "  c: " << num(cfg.policy.concave_curvature) << "\n"
      << "  tau: " << num(cfg.policy.deterministic_threshold) << "\n"
      << "  beta: " << num(cfg.policy.beta) << "\n"
      << "  max_power: " << num(cfg.policy.max_power) << "\n";
    o << "access_mode: " << to_string(cfg.access_mode) << "\n";
    o << "duplex:\n"
      << "  enabled: " << (cfg.duplex.enabled ? "true" : "false") << "\n"
      << "  si_residual: " << num(cfg.duplex.si_residual) << "\n"
      << "  rate_model: " << to_string(cfg.duplex.rate_model) << "\n"
      << "  hd_scheme: " << to_string(cfg.duplex.hd_scheme) << "\n";
    const auto& t = cfg.timing;
    o << "timing:\n"
      << "  slot: " << num(t.slot) << "\n"
      << "  sensing_period: " << num(t.sensing_period) << "\n"
      << "  feedback_period: " << num(t.feedback_period) << "\n"
      << "  op_read_period: " << num(t.op_read_period) << "\n"
      << "  field_redraw_period: " << num(t.field_redraw_period) << "\n"
      << "  control_delays:\n"
      << "    feedback: " << num(t.control_delays.feedback) << "\n"
      << "    uplink: " << num(t.control_delays.uplink) << "\n"
      << "    compute: " << num(t.control_delays.compute) << "\n"
      << "    downlink: " << num(t.control_delays.downlink) << "\n"
      << "    apply: " << num(t.control_delays.apply) << "\n";
    const auto& s = cfg.op_source;
    o << "op_source:\n"
      << "  kind: " << to_string(s.kind) << "\n"
      << "  table: " << quoted(s.table_path) << "\n"
      << "  desired_link_distance: " << num(s.desired_link_distance) << "\n"
      << "  conditioning:\n"
      << "    epsilon: " << num(s.conditioning.bin_relative_halfwidth) << "\n"
      << "    min_accepted: " << s.conditioning.min_accepted_samples << "\n"
      << "    max_total: " << s.conditioning.max_total_samples << "\n"
      << "  grid:\n"
      << "    interference_points: " << s.interference_points << "\n"
      << "    distance_points: " << s.distance_points << "\n";
    o << "run:\n"
      << "  slots: " << cfg.run.slots << "\n"
      << "  seed: " << cfg.run.seed << "\n";
    o << "overhead:\n"
      << "  cp_fraction: " << num(cfg.overhead.cp_fraction) << "\n"
      << "  pss_fraction: " << num(cfg.overhead.pss_fraction) << "\n"
      << "  rs_fraction: " << num(cfg.overhead.rs_fraction) << "\n";
    return o.str();
}

}  // namespace opsim
