#include "dsr/io.hpp"

#include "dsr/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace dsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class T>
T field(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, std::string("config field '") + key + "': " + e.what());
    }
}

template <class T>
T required(const json& j, const char* key) {
    if (!j.contains(key)) fail(ErrorCode::ConfigError, std::string("missing config field '") + key + "'");
    return field<T>(j, key, T{});
}

Eigen::VectorXd to_vector(const json& j, const char* what) {
    if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
    if (!j.is_array()) fail(ErrorCode::ConfigError, std::string(what) + " must be a number or array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(ErrorCode::ConfigError, std::string(what) + " must hold numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Eigen::MatrixXd to_matrix(const json& j, const char* what) {
    if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty()) fail(ErrorCode::ConfigError, std::string(what) + " must be a matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (j[0].is_number()) {
        // a flat list is read as a diagonal
        return to_vector(j, what).asDiagonal();
    }
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            fail(ErrorCode::ConfigError, std::string(what) + " rows must have equal length");
        }
        m.row(r) = to_vector(row, what).transpose();
    }
    return m;
}

MarketSegment parse_segment(const json& j) {
    MarketSegment s;
    s.t_start = field<double>(j, "t_start", 0.0);
    s.r = required<double>(j, "r");
    if (!j.contains("mu") || !j.contains("sigma")) {
        fail(ErrorCode::ConfigError, "market segment needs mu and sigma");
    }
    s.mu = to_vector(j.at("mu"), "mu");
    s.sigma = to_matrix(j.at("sigma"), "sigma");
    return s;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> number_list(const json& j, const char* key) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    const auto v = to_vector(j.at(key), key);
    out.assign(v.data(), v.data() + v.size());
    return out;
}

}  // namespace

MarketModel parse_market(const json& j) {
    if (!j.is_object()) fail(ErrorCode::ConfigError, "market block must be an object");
    const double horizon = field<double>(j, "horizon", 1.0);
    std::vector<MarketSegment> segs;
    if (j.contains("segments")) {
        for (const auto& s : j.at("segments")) segs.push_back(parse_segment(s));
    } else {
        segs.push_back(parse_segment(j));
    }
    const double eps = field<double>(j, "eps_nd", MarketModel::kDefaultNondegeneracy);
    return MarketModel::create(horizon, std::move(segs), eps);
}

json market_to_json(const MarketModel& m) {
    json segs = json::array();
    for (const auto& s : m.segments()) {
        json sigma = json::array();
        for (Eigen::Index r = 0; r < s.sigma.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < s.sigma.cols(); ++c) row.push_back(s.sigma(r, c));
            sigma.push_back(row);
        }
        segs.push_back({{"t_start", s.t_start},
                        {"r", s.r},
                        {"mu", std::vector<double>(s.mu.data(), s.mu.data() + s.mu.size())},
                        {"sigma", sigma}});
    }
    return {{"horizon", m.horizon()}, {"segments", segs}};
}

RunConfig parse_config(const json& j) {
    if (!j.is_object() || !j.contains("market") || !j.contains("problem")) {
        fail(ErrorCode::ConfigError, "config needs 'market' and 'problem' blocks");
    }
    RunConfig cfg(parse_market(j.at("market")));
    cfg.market_json = j.at("market");
    const auto& m = cfg.market;
    const double growth = std::exp(m.integrated_rate(0.0, m.horizon()));

    const auto& p = j.at("problem");
    const auto kind = field<std::string>(p, "kind", "lpm");
    const double x0 = required<double>(p, "x0");
    if (kind == "lpm") {
        cfg.kind = ProblemKind::Lpm;
        cfg.lpm.x0 = x0;
        cfg.lpm.d = required<double>(p, "d");
        cfg.lpm.B = required<double>(p, "B");
        cfg.lpm.q = field<double>(p, "q", 2.0);
        cfg.lpm.gamma = field<double>(p, "gamma", x0 * growth);
    } else if (kind == "cvar") {
        cfg.kind = ProblemKind::Cvar;
        cfg.cvar.x0 = x0;
        cfg.cvar.d = required<double>(p, "d");
        cfg.cvar.B = required<double>(p, "B");
        cfg.cvar.beta = field<double>(p, "beta", 0.95);
        cfg.cvar.xbar = field<double>(p, "xbar", std::numeric_limits<double>::quiet_NaN());
        const auto mode = field<std::string>(p, "alpha_search", "golden");
        if (mode == "golden") cfg.alpha.mode = AlphaSearchMode::GoldenSection;
        else if (mode == "gradient") cfg.alpha.mode = AlphaSearchMode::Gradient;
        else fail(ErrorCode::ConfigError, "alpha_search must be 'golden' or 'gradient'");
    } else if (kind == "mv") {
        cfg.kind = ProblemKind::Mv;
        cfg.mv.x0 = x0;
        cfg.mv.d = required<double>(p, "d");
    } else {
        fail(ErrorCode::ConfigError, "problem kind must be lpm, cvar or mv; got '" + kind + "'");
    }

    if (j.contains("run")) {
        const auto& r = j.at("run");
        auto& o = cfg.run;
        o.seed = field<std::uint64_t>(r, "seed", o.seed);
        o.paths = field<int>(r, "paths", o.paths);
        o.steps = field<int>(r, "steps", o.steps);
        o.scenarios = field<int>(r, "scenarios", o.scenarios);
        o.t = field<double>(r, "t", o.t);
        if (r.contains("z_min")) o.z_min = field<double>(r, "z_min", 0.0);
        if (r.contains("z_max")) o.z_max = field<double>(r, "z_max", 0.0);
        o.z_points = field<int>(r, "z_points", o.z_points);
        o.d_grid = number_list(r, "d_grid");
        o.betas = number_list(r, "betas");
        o.out = field<std::string>(r, "out", o.out);
    }
    cfg.assumptions = j.value("assumptions", json::object());
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, "config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

json payoff_to_json(const Payoff& x) {
    json out = json::array();
    for (const auto& p : x.pieces) {
        out.push_back({{"lo", p.lo}, {"hi", number_or_null(p.hi)}, {"c0", p.c0}, {"c1", p.c1}});
    }
    return out;
}

Payoff payoff_from_json(const json& j) {
    Payoff x;
    for (const auto& p : j) {
        PayoffPiece pc;
        pc.lo = required<double>(p, "lo");
        pc.hi = p.at("hi").is_null() ? kInf : p.at("hi").get<double>();
        pc.c0 = required<double>(p, "c0");
        pc.c1 = required<double>(p, "c1");
        x.pieces.push_back(pc);
    }
    return x;
}

PayoffPolicy policy_from_solution(const json& solution) {
    if (!solution.contains("market") || !solution.contains("payoff")) {
        fail(ErrorCode::ConfigError, "solution artifact lacks market or payoff");
    }
    return PayoffPolicy(parse_market(solution.at("market")), payoff_from_json(solution.at("payoff")));
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(12) << v;
    return os.str();
}

}  // namespace dsr
