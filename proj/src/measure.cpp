#include "freemult/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "freemult/errors.hpp"

namespace freemult {

using nlohmann::json;

std::string space_name(Space s) {
    return s == Space::circle ? "circle" : "halfline";
}

double Measure::atom_mass() const {
    double m = 0.0;
    for (const auto& a : atoms) m += a.mass;
    return m;
}

double Measure::density_mass() const {
    if (!has_density()) return 0.0;
    const auto& d = *density;
    const std::size_t n = d.nodes.size();
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        m += 0.5 * (d.values[i] + d.values[i + 1]) * (d.nodes[i + 1] - d.nodes[i]);
    if (space == Space::circle && n >= 2) {
        // periodic closure: arc from the last node back to the first
        double gap = (d.nodes.front() + kTwoPi) - d.nodes.back();
        m += 0.5 * (d.values.back() + d.values.front()) * gap;
    }
    return m;
}

void Measure::validate() const {
    for (const auto& a : atoms) {
        if (!(a.mass > 0.0) || a.mass > 1.0 + 1e-12)
            throw ValidationError("measure: atom mass must lie in (0,1], got " +
                                  format_double(a.mass));
        if (space == Space::circle) {
            if (!(a.pos > -kPi - 1e-15) || a.pos > kPi + 1e-15)
                throw ValidationError("measure: grid range: circle atom angle " +
                                      format_double(a.pos) + " outside (-pi, pi]");
        } else {
            if (!(a.pos >= 0.0) || !std::isfinite(a.pos))
                throw ValidationError("measure: halfline atom position must be >= 0");
        }
    }
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = i + 1; j < atoms.size(); ++j)
            if (atoms[i].pos == atoms[j].pos)
                throw ValidationError("measure: atom positions must be distinct");
    if (density) {
        const auto& d = *density;
        if (d.nodes.size() != d.values.size())
            throw ValidationError("measure: density nodes/values size mismatch");
        if (d.nodes.size() < 2 && !d.nodes.empty())
            throw ValidationError("measure: density grid needs at least two nodes");
        for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i)
            if (!(d.nodes[i] < d.nodes[i + 1]))
                throw ValidationError("measure: density nodes must be strictly increasing");
        for (double x : d.nodes) {
            if (space == Space::circle) {
                if (!(x > -kPi) || x > kPi + 1e-15)
                    throw ValidationError("measure: grid range: circle node " +
                                          format_double(x) + " outside (-pi, pi]");
            } else if (!(x > 0.0) || !std::isfinite(x)) {
                throw ValidationError("measure: grid range: halfline node " +
                                      format_double(x) + " outside (0, inf)");
            }
        }
        for (double v : d.values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw ValidationError("measure: density values must be finite and >= 0");
    }
    if (atoms.empty() && !has_density())
        throw ValidationError("measure: empty (no atoms, no density)");
    double m = total_mass();
    if (std::abs(m - 1.0) > 1e-9)
        throw ValidationError("measure: total mass " + format_double(m) +
                              " differs from 1 by more than 1e-9");
}

Measure Measure::point_mass(Space space, double pos, const std::string& label) {
    Measure mu;
    mu.space = space;
    mu.atoms = {Atom{pos, 1.0}};
    mu.label = label.empty() ? "point mass" : label;
    mu.validate();
    return mu;
}

Measure Measure::haar(int grid_size) {
    Measure mu;
    mu.space = Space::circle;
    DensityGrid d;
    d.nodes = uniform_circle_grid(grid_size);
    d.values.assign(d.nodes.size(), 1.0 / kTwoPi);
    mu.density = std::move(d);
    mu.label = "haar";
    mu.validate();
    return mu;
}

Measure Measure::from_density(Space space, std::vector<double> nodes,
                              std::vector<double> values, const std::string& label,
                              bool renormalize) {
    Measure mu;
    mu.space = space;
    mu.density = DensityGrid{std::move(nodes), std::move(values)};
    mu.label = label;
    if (renormalize) {
        double m = mu.density_mass();
        if (!(m > 0.0))
            throw ValidationError("measure: cannot renormalize zero-mass density");
        for (double& v : mu.density->values) v /= m;
    }
    mu.validate();
    return mu;
}

// ------------------------------------------------------------------ moments

namespace {

// Exact integral of e^{ik t}(linear) over one cell, with a Gauss fallback
// when k*(b-a) is too small for the closed form to cancel stably.
cplx circle_cell_moment(int k, double a, double b, double fa, double fb) {
    if (k == 0) return cplx(0.5 * (fa + fb) * (b - a), 0.0);
    const double h = b - a;
    const double s = (fb - fa) / h;
    if (std::abs(k) * h < 0.5) {
        return gauss5(a, b, [&](double t) {
            double f = fa + s * (t - a);
            return cplx(std::cos(k * t), std::sin(k * t)) * f;
        });
    }
    const cplx ik(0.0, double(k));
    auto prim = [&](double t, double f) {
        cplx e(std::cos(k * t), std::sin(k * t));
        return e * (f / ik + s / (double(k) * double(k)));
    };
    return prim(b, fb) - prim(a, fa);
}

double halfline_cell_moment(int k, double a, double b, double fa, double fb) {
    // integral of x^k (fa + s(x-a)) dx, closed form
    const double s = (fb - fa) / (b - a);
    const double c0 = fa - s * a;
    auto powint = [](double x, int p) { return std::pow(x, p); };
    double t1 = c0 * (powint(b, k + 1) - powint(a, k + 1)) / double(k + 1);
    double t2 = s * (powint(b, k + 2) - powint(a, k + 2)) / double(k + 2);
    return t1 + t2;
}

}  // namespace

cplx moment(const Measure& mu, int k) {
    mu.validate();
    if (k <= 0) throw ValidationError("moment: order must be a positive integer");
    if (mu.space == Space::circle) {
        cplx m(0.0, 0.0);
        for (const auto& a : mu.atoms)
            m += a.mass * cplx(std::cos(k * a.pos), std::sin(k * a.pos));
        if (mu.has_density()) {
            const auto& d = *mu.density;
            for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i)
                m += circle_cell_moment(k, d.nodes[i], d.nodes[i + 1], d.values[i],
                                        d.values[i + 1]);
            // wrap cell
            double a0 = d.nodes.back(), b0 = d.nodes.front() + kTwoPi;
            if (b0 > a0)
                m += circle_cell_moment(k, a0, b0, d.values.back(), d.values.front());
        }
        return m;
    }
    double m = 0.0;
    for (const auto& a : mu.atoms) m += a.mass * std::pow(a.pos, k);
    if (mu.has_density()) {
        const auto& d = *mu.density;
        for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i)
            m += halfline_cell_moment(k, d.nodes[i], d.nodes[i + 1], d.values[i],
                                      d.values[i + 1]);
    }
    if (!std::isfinite(m)) return cplx(std::numeric_limits<double>::infinity(), 0.0);
    return cplx(m, 0.0);
}

double log_mean_b(const Measure& mu) {
    mu.validate();
    if (mu.space != Space::halfline)
        throw ValidationError("log_mean_b: requires a halfline measure");
    const double lo = std::exp(-1.0), hi = std::exp(1.0);
    double acc = 0.0;
    for (const auto& a : mu.atoms)
        if (a.pos >= lo && a.pos <= hi) acc += a.mass * std::log(a.pos);
    if (mu.has_density()) {
        const auto& d = *mu.density;
        for (std::size_t i = 0; i + 1 < d.nodes.size(); ++i) {
            double a = std::max(d.nodes[i], lo), b = std::min(d.nodes[i + 1], hi);
            if (b <= a) continue;
            double s = (d.values[i + 1] - d.values[i]) / (d.nodes[i + 1] - d.nodes[i]);
            auto f = [&](double x) { return d.values[i] + s * (x - d.nodes[i]); };
            acc += 0.5 * (b - a) * (std::log(a) * f(a) + std::log(b) * f(b));
        }
    }
    return std::exp(acc);
}

Measure scale_measure(const Measure& mu, double b) {
    mu.validate();
    if (mu.space != Space::halfline)
        throw ValidationError("scale_measure: requires a halfline measure");
    if (!(b > 0.0)) throw ValidationError("scale_measure: scale must be > 0");
    Measure out = mu;
    for (auto& a : out.atoms) a.pos /= b;
    if (out.density) {
        for (auto& x : out.density->nodes) x /= b;
        for (auto& v : out.density->values) v *= b;
    }
    out.validate();
    return out;
}

// --------------------------------------------------------------------- json

Measure parse_measure(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("measure json: malformed document: ") + e.what());
    }
    Measure mu;
    try {
        std::string sp = doc.at("space").get<std::string>();
        if (sp == "circle")
            mu.space = Space::circle;
        else if (sp == "halfline")
            mu.space = Space::halfline;
        else
            throw ValidationError("measure json: space must be 'circle' or 'halfline'");
        if (doc.contains("atoms"))
            for (const auto& a : doc.at("atoms"))
                mu.atoms.push_back(Atom{a.at("pos").get<double>(), a.at("mass").get<double>()});
        if (doc.contains("density") && !doc.at("density").is_null()) {
            DensityGrid d;
            d.nodes = doc.at("density").at("nodes").get<std::vector<double>>();
            d.values = doc.at("density").at("values").get<std::vector<double>>();
            mu.density = std::move(d);
        }
        if (doc.contains("label")) mu.label = doc.at("label").get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("measure json: ") + e.what());
    }
    mu.validate();
    return mu;
}

std::string serialize_measure(const Measure& mu) {
    mu.validate();
    json doc;
    doc["space"] = space_name(mu.space);
    doc["atoms"] = json::array();
    for (const auto& a : mu.atoms)
        doc["atoms"].push_back(json{{"pos", a.pos}, {"mass", a.mass}});
    if (mu.has_density())
        doc["density"] = json{{"nodes", mu.density->nodes}, {"values", mu.density->values}};
    else
        doc["density"] = nullptr;
    doc["label"] = mu.label;
    return doc.dump(2);
}

// ------------------------------------------------------------------ profile

void DensityProfile::validate() const {
    if (nodes.size() != values.size())
        throw ValidationError("profile: nodes/values size mismatch");
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (!(nodes[i] < nodes[i + 1]))
            throw ValidationError("profile: nodes must be strictly increasing");
    for (double v : values)
        if (!std::isfinite(v) || v < -1e-12)
            throw ValidationError("profile: values must be finite and >= -1e-12");
    if (!unreliable.empty() && unreliable.size() != nodes.size())
        throw ValidationError("profile: unreliable flag size mismatch");
}

std::size_t DensityProfile::unreliable_count() const {
    std::size_t n = 0;
    for (auto u : unreliable) n += (u != 0);
    return n;
}

double DensityProfile::mass(bool reliable_only) const {
    auto val = [&](std::size_t i) {
        if (reliable_only && !unreliable.empty() && unreliable[i]) return 0.0;
        return std::max(values[i], 0.0);
    };
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        m += 0.5 * (val(i) + val(i + 1)) * (nodes[i + 1] - nodes[i]);
    if (space == Space::circle && nodes.size() >= 2) {
        double gap = (nodes.front() + kTwoPi) - nodes.back();
        m += 0.5 * (val(nodes.size() - 1) + val(0)) * gap;
    }
    return m;
}

double DensityProfile::interpolate(double pos) const {
    if (nodes.empty()) return 0.0;
    double x = pos;
    if (space == Space::circle) {
        while (x <= -kPi) x += kTwoPi;
        while (x > kPi) x -= kTwoPi;
        if (x < nodes.front() || x > nodes.back()) {
            // wrap arc between back() and front()+2pi
            double gap = (nodes.front() + kTwoPi) - nodes.back();
            if (gap <= 0.0) return 0.0;
            double t = (x >= nodes.back()) ? (x - nodes.back())
                                           : (x + kTwoPi - nodes.back());
            double w = t / gap;
            return (1.0 - w) * std::max(values.back(), 0.0) +
                   w * std::max(values.front(), 0.0);
        }
    } else if (x <= nodes.front() || x >= nodes.back()) {
        return 0.0;
    }
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    std::size_t i = (it == nodes.begin()) ? 0 : std::size_t(it - nodes.begin()) - 1;
    if (i + 1 >= nodes.size()) return std::max(values.back(), 0.0);
    double w = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
    return (1.0 - w) * std::max(values[i], 0.0) + w * std::max(values[i + 1], 0.0);
}

std::string DensityProfile::to_csv() const {
    std::ostringstream os;
    os << "# space: " << space_name(space) << "\n";
    if (!meta.law.empty()) os << "# law: " << meta.law << "\n";
    for (const auto& [k, v] : meta.params)
        os << "# " << k << ": " << format_double(v) << "\n";
    os << "# sup_error_estimate: " << format_double(sup_error_estimate) << "\n";
    os << "# unreliable_count: " << unreliable_count() << "\n";
    os << "node,value\n";
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double v = std::max(values[i], 0.0);  // clamp numerical noise on output
        os << format_double(nodes[i]) << "," << format_double(v) << "\n";
    }
    return os.str();
}

Measure DensityProfile::to_measure(bool renormalize) const {
    std::vector<double> vals(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) vals[i] = std::max(values[i], 0.0);
    return Measure::from_density(space, nodes, std::move(vals), meta.law, renormalize);
}

DensityProfile parse_profile_csv(const std::string& text) {
    DensityProfile p;
    std::istringstream is(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto colon = line.find(':');
            if (colon != std::string::npos) {
                std::string key = line.substr(1, colon - 1);
                std::string val = line.substr(colon + 1);
                auto trim = [](std::string s) {
                    s.erase(0, s.find_first_not_of(" \t"));
                    s.erase(s.find_last_not_of(" \t") + 1);
                    return s;
                };
                key = trim(key);
                val = trim(val);
                if (key == "space") p.space = (val == "circle") ? Space::circle : Space::halfline;
                else if (key == "law") p.meta.law = val;
                else if (key == "sup_error_estimate") p.sup_error_estimate = std::stod(val);
                else if (key == "unreliable_count") { /* derived */ }
                else {
                    try { p.meta.params[key] = std::stod(val); } catch (...) {}
                }
            }
            continue;
        }
        if (!header_seen) {
            if (line.rfind("node", 0) != 0)
                throw ValidationError("profile csv: missing 'node,value' header");
            header_seen = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("profile csv: malformed row '" + line + "'");
        p.nodes.push_back(std::stod(line.substr(0, comma)));
        p.values.push_back(std::stod(line.substr(comma + 1)));
    }
    p.validate();
    return p;
}

// -------------------------------------------------------------------- grids

std::vector<double> uniform_circle_grid(int n) {
    if (n < 2) throw ValidationError("grid: circle grid needs n >= 2");
    std::vector<double> g(n);
    // n evenly spaced angles with pi included as the last node
    for (int i = 0; i < n; ++i) g[i] = -kPi + kTwoPi * double(i + 1) / double(n);
    return g;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
    if (!(lo < hi) || n < 2) throw ValidationError("grid: bad uniform grid spec");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
    g.back() = hi;
    return g;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
    if (!(0.0 < lo && lo < hi) || n < 2)
        throw ValidationError("grid: bad geometric grid spec");
    std::vector<double> g(n);
    double r = std::log(hi / lo);
    for (int i = 0; i < n; ++i) g[i] = lo * std::exp(r * double(i) / double(n - 1));
    g.back() = hi;
    return g;
}

}  // namespace freemult
