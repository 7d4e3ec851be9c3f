#include "gjsim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "gjsim/error.hpp"
#include "gjsim/units.hpp"

namespace gjsim {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    double v = 0.0;
    const char* begin = s.data();
    if (!s.empty() && s[0] == '+') ++begin;
    const auto res = std::from_chars(begin, s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(key, key + ": expected a number, got '" + s + "'");
    return v;
}

long parse_integer(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError(key, key + ": expected an integer, got '" + s + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key, key + ": expected true or false, got '" + s + "'");
}

// Reads one section, tracking which keys were consumed.
class Section {
public:
    Section(std::string name, const pt::ptree* tree) : name_(std::move(name)), tree_(tree) {}

    bool present() const { return tree_ != nullptr; }

    std::optional<std::string> raw(const std::string& key) {
        known_.insert(key);
        if (!tree_) return std::nullopt;
        auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        return it->second.data();
    }

    void number(const std::string& key, double& out) {
        if (auto r = raw(key)) out = parse_double(key, *r);
    }
    void integer(const std::string& key, int& out) {
        if (auto r = raw(key)) out = static_cast<int>(parse_integer(key, *r));
    }
    void flag(const std::string& key, bool& out) {
        if (auto r = raw(key)) out = parse_bool(key, *r);
    }
    double required(const std::string& key) {
        auto r = raw(key);
        if (!r) throw ConfigError(key, "missing required key [" + name_ + "] " + key);
        return parse_double(key, *r);
    }

    void reject_unknown() const {
        if (!tree_) return;
        for (const auto& [k, v] : *tree_)
            if (!known_.count(k)) throw ConfigError(k, "unknown key [" + name_ + "] " + k);
    }

private:
    std::string name_;
    const pt::ptree* tree_;
    std::set<std::string> known_;
};

// Energy given either in meV under `key` or in THz under `key_thz`.
void energy(Section& s, const std::string& key, double& out) {
    auto mev = s.raw(key);
    auto thz = s.raw(key + "_thz");
    if (mev && thz) throw ConfigError(key, "give either " + key + " or " + key + "_thz, not both");
    if (mev) out = parse_double(key, *mev);
    if (thz) out = thz_to_mev(parse_double(key + "_thz", *thz));
}

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void Config::validate() const {
    reduced.validate();
    if (micro) micro->validate();
    conditions.validate();
    solver.validate();
    sweep.validate();
    if (ed.n_spins < 2 || ed.n_spins % 2 != 0) throw ConfigError("n_spins", "n_spins must be a positive even number");
    if (ed.n_max < 1) throw ConfigError("n_max", "n_max must be at least 1");
    if (thz.thickness_mm && !(*thz.thickness_mm > 0.0)) throw ConfigError("thickness_mm", "thickness must be positive");
    const auto& a = thz.analysis;
    if (!(a.snr_floor >= 0.0 && a.snr_floor < 1.0)) throw ConfigError("snr_floor", "snr_floor must lie in [0, 1)");
    if (!(a.taper >= 0.0 && a.taper <= 1.0)) throw ConfigError("taper", "taper must lie in [0, 1]");
    if (!(a.echo_margin > 0.0 && a.echo_margin <= 1.0)) throw ConfigError("echo_margin", "echo_margin must lie in (0, 1]");
    if (!(a.anchor_fraction > 0.0 && a.anchor_fraction <= 1.0))
        throw ConfigError("anchor_fraction", "anchor_fraction must lie in (0, 1]");
}

Config load_config(std::string_view text) {
    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", std::string("malformed configuration: ") + e.message() + " at line " +
                                        std::to_string(e.line()));
    }
    static const std::set<std::string> sections{"reduced", "micro", "conditions", "solver", "sweep", "ed", "thz"};
    for (const auto& [name, sub] : tree) {
        if (!sections.count(name)) throw ConfigError(name, "unknown section [" + name + "]");
        if (sub.empty() && !sub.data().empty()) throw ConfigError(name, "key " + name + " outside any section");
    }
    auto section = [&](const std::string& name) {
        auto it = tree.find(name);
        return Section(name, it == tree.not_found() ? nullptr : &it->second);
    };

    Config c;
    {
        Section s = section("reduced");
        energy(s, "omega_pi", c.reduced.omega_pi);
        energy(s, "omega_er", c.reduced.omega_er);
        s.number("g", c.reduced.g);
        s.number("j", c.reduced.j);
        if (auto r = s.raw("g_lande_z")) c.reduced.g_lande_z = parse_double("g_lande_z", *r);
        s.number("z_er", c.reduced.z_er);
        s.number("n0", c.reduced.n0);
        s.reject_unknown();
    }
    {
        Section s = section("micro");
        if (s.present()) {
            MicroParams m;
            m.j_fe = s.required("j_fe");
            m.d_fe_y = s.required("d_fe_y");
            m.a_x = s.required("a_x");
            m.a_z = s.required("a_z");
            m.a_xz = s.required("a_xz");
            m.j_er = s.required("j_er");
            m.j_cross = s.required("j_cross");
            m.d_x = s.required("d_x");
            m.d_y = s.required("d_y");
            const char* axes[3] = {"x", "y", "z"};
            for (int k = 0; k < 3; ++k) {
                m.g_fe[k] = s.required(std::string("g_fe_") + axes[k]);
                m.g_er[k] = s.required(std::string("g_er_") + axes[k]);
            }
            s.number("s_fe", m.s_fe);
            s.integer("z_fe", m.z_fe);
            s.integer("z_er", m.z_er);
            s.reject_unknown();
            c.micro = m;
        }
    }
    {
        Section s = section("conditions");
        s.number("temperature", c.conditions.temperature);
        s.number("b_field", c.conditions.b_field);
        if (auto r = s.raw("field_axis")) c.conditions.axis = parse_field_axis(trim(*r));
        s.reject_unknown();
    }
    {
        Section s = section("solver");
        auto& v = c.solver;
        s.number("tolerance", v.tolerance);
        s.integer("max_iterations", v.max_iterations);
        s.number("mixing", v.mixing);
        s.number("min_mixing", v.min_mixing);
        s.integer("stall_window", v.stall_window);
        s.flag("newton_polish", v.newton_polish);
        s.integer("newton_after", v.newton_after);
        if (auto r = s.raw("free_energy_prescription")) v.prescription = parse_prescription(trim(*r));
        s.integer("threads", v.threads);
        s.reject_unknown();
    }
    {
        Section s = section("sweep");
        auto& v = c.sweep;
        s.number("t_min", v.t_min);
        s.number("t_max", v.t_max);
        s.number("h_min", v.h_min);
        s.number("h_max", v.h_max);
        s.integer("t_points", v.t_points);
        s.integer("h_points", v.h_points);
        if (auto r = s.raw("model")) v.model = atlas::parse_model(trim(*r));
        s.number("eps", v.eps);
        s.number("delta_jump", v.delta_jump);
        if (auto r = s.raw("classify_rule")) v.rule = atlas::parse_classify_rule(trim(*r));
        s.flag("refine_boundaries", v.refine_boundaries);
        s.number("refine_tolerance", v.refine_tolerance);
        s.number("mce_dh", v.mce_dh);
        s.number("calibrate_field", v.calibrate_field);
        s.number("calibrate_temperature", v.calibrate_temperature);
        s.reject_unknown();
    }
    {
        Section s = section("ed");
        s.integer("n_spins", c.ed.n_spins);
        s.integer("n_max", c.ed.n_max);
        if (auto r = s.raw("max_dimension")) {
            const long v = parse_integer("max_dimension", *r);
            if (v < 1) throw ConfigError("max_dimension", "max_dimension must be positive");
            c.ed.max_dimension = static_cast<std::size_t>(v);
        }
        s.reject_unknown();
    }
    {
        Section s = section("thz");
        auto& a = c.thz.analysis;
        if (auto r = s.raw("thickness_mm")) c.thz.thickness_mm = parse_double("thickness_mm", *r);
        s.number("snr_floor", a.snr_floor);
        if (auto r = s.raw("window")) {
            const std::string w = trim(*r);
            if (w == "rectangular") a.window = thz::WindowKind::rectangular;
            else if (w == "tukey") a.window = thz::WindowKind::tukey;
            else throw ConfigError("window", "window must be 'rectangular' or 'tukey'");
        }
        s.number("taper", a.taper);
        s.flag("echo_refine", a.echo_refine);
        s.number("echo_margin", a.echo_margin);
        s.number("anchor_fraction", a.anchor_fraction);
        s.reject_unknown();
    }
    c.validate();
    return c;
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", path + ": cannot open configuration file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str());
}

std::string to_ini(const Config& c) {
    std::ostringstream o;
    const auto& r = c.reduced;
    o << "[reduced]\n"
      << "omega_pi = " << num(r.omega_pi) << "\n"
      << "omega_er = " << num(r.omega_er) << "\n"
      << "g = " << num(r.g) << "\n"
      << "j = " << num(r.j) << "\n";
    if (r.g_lande_z) o << "g_lande_z = " << num(*r.g_lande_z) << "\n";
    o << "z_er = " << num(r.z_er) << "\n"
      << "n0 = " << num(r.n0) << "\n";
    if (c.micro) {
        const auto& m = *c.micro;
        o << "\n[micro]\n"
          << "j_fe = " << num(m.j_fe) << "\n"
          << "d_fe_y = " << num(m.d_fe_y) << "\n"
          << "a_x = " << num(m.a_x) << "\n"
          << "a_z = " << num(m.a_z) << "\n"
          << "a_xz = " << num(m.a_xz) << "\n"
          << "j_er = " << num(m.j_er) << "\n"
          << "j_cross = " << num(m.j_cross) << "\n"
          << "d_x = " << num(m.d_x) << "\n"
          << "d_y = " << num(m.d_y) << "\n";
        const char* axes[3] = {"x", "y", "z"};
        for (int k = 0; k < 3; ++k) o << "g_fe_" << axes[k] << " = " << num(m.g_fe[k]) << "\n";
        for (int k = 0; k < 3; ++k) o << "g_er_" << axes[k] << " = " << num(m.g_er[k]) << "\n";
        o << "s_fe = " << num(m.s_fe) << "\n"
          << "z_fe = " << m.z_fe << "\n"
          << "z_er = " << m.z_er << "\n";
    }
    o << "\n[conditions]\n"
      << "temperature = " << num(c.conditions.temperature) << "\n"
      << "b_field = " << num(c.conditions.b_field) << "\n"
      << "field_axis = " << to_string(c.conditions.axis) << "\n";
    const auto& s = c.solver;
    o << "\n[solver]\n"
      << "tolerance = " << num(s.tolerance) << "\n"
      << "max_iterations = " << s.max_iterations << "\n"
      << "mixing = " << num(s.mixing) << "\n"
      << "min_mixing = " << num(s.min_mixing) << "\n"
      << "stall_window = " << s.stall_window << "\n"
      << "newton_polish = " << (s.newton_polish ? "true" : "false") << "\n"
      << "newton_after = " << s.newton_after << "\n"
      << "free_energy_prescription = " << to_string(s.prescription) << "\n"
      << "threads = " << s.threads << "\n";
    const auto& w = c.sweep;
    o << "\n[sweep]\n"
      << "t_min = " << num(w.t_min) << "\n"
      << "t_max = " << num(w.t_max) << "\n"
      << "h_min = " << num(w.h_min) << "\n"
      << "h_max = " << num(w.h_max) << "\n"
      << "t_points = " << w.t_points << "\n"
      << "h_points = " << w.h_points << "\n"
      << "model = " << atlas::to_string(w.model) << "\n"
      << "eps = " << num(w.eps) << "\n"
      << "delta_jump = " << num(w.delta_jump) << "\n"
      << "classify_rule = " << atlas::to_string(w.rule) << "\n"
      << "refine_boundaries = " << (w.refine_boundaries ? "true" : "false") << "\n"
      << "refine_tolerance = " << num(w.refine_tolerance) << "\n"
      << "mce_dh = " << num(w.mce_dh) << "\n"
      << "calibrate_field = " << num(w.calibrate_field) << "\n"
      << "calibrate_temperature = " << num(w.calibrate_temperature) << "\n";
    o << "\n[ed]\n"
      << "n_spins = " << c.ed.n_spins << "\n"
      << "n_max = " << c.ed.n_max << "\n"
      << "max_dimension = " << c.ed.max_dimension << "\n";
    const auto& a = c.thz.analysis;
    o << "\n[thz]\n";
    if (c.thz.thickness_mm) o << "thickness_mm = " << num(*c.thz.thickness_mm) << "\n";
    o << "snr_floor = " << num(a.snr_floor) << "\n"
      << "window = " << (a.window == thz::WindowKind::tukey ? "tukey" : "rectangular") << "\n"
      << "taper = " << num(a.taper) << "\n"
      << "echo_refine = " << (a.echo_refine ? "true" : "false") << "\n"
      << "echo_margin = " << num(a.echo_margin) << "\n"
      << "anchor_fraction = " << num(a.anchor_fraction) << "\n";
    return o.str();
}

}  // namespace gjsim
