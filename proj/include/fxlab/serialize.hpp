#pragma once

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include "fxlab/analysis.hpp"
#include "fxlab/error.hpp"
#include "fxlab/lstm.hpp"
#include "fxlab/metrics.hpp"
#include "fxlab/stattests.hpp"
#include "fxlab/svr.hpp"
#include "fxlab/var.hpp"

namespace fxlab {

using nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
    detail::require(j.is_array() && !j.empty() && j[0].is_array(), ErrorKind::ConfigError,
                    "expected a nested array matrix");
    Eigen::MatrixXd m(j.size(), j[0].size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        detail::require(j[static_cast<std::size_t>(r)].size() ==
                            static_cast<std::size_t>(m.cols()),
                        ErrorKind::ConfigError, "ragged matrix rows");
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

// ---- stattests ----

inline json to_json(const stats::AdfResult& r, const std::string& series, int differenced) {
    return json{{"test", "adf"},
                {"series", series},
                {"differenced", differenced},
                {"statistic", r.statistic},
                {"critical_5pct", r.critical_5pct},
                {"lags", r.lag_order_used},
                {"regression", r.regression_kind == stats::AdfRegression::Constant
                                   ? "constant"
                                   : "constant+trend"},
                {"decision", r.reject_unit_root ? "stationary" : "non-stationary"}};
}

inline json to_json(const stats::GrangerResult& r) {
    return json{{"test", "granger"},
                {"series", r.cause + "->" + r.effect},
                {"cause", r.cause},
                {"effect", r.effect},
                {"lags", r.lags},
                {"f_statistic", r.f_statistic},
                {"p_value", r.p_value},
                {"decision", r.reject_noncausality ? "causal" : "non-causal"}};
}

inline json to_json(const stats::DwResult& r, const std::string& series) {
    return json{{"test", "durbin-watson"},
                {"series", series},
                {"statistic", r.statistic},
                {"interpretation", stats::to_string(r.interpretation)}};
}

// ---- var ----

inline json to_json(const var::VarModel& m) {
    json lags = json::array();
    for (const auto& A : m.lag_coeffs) lags.push_back(matrix_to_json(A));
    return json{{"p", m.lag_order},
                {"names", m.names},
                {"alpha", vector_to_json(m.intercepts)},
                {"A", std::move(lags)},
                {"sigma", matrix_to_json(m.sigma)}};
}

inline var::VarModel var_from_json(const json& j) {
    var::VarModel m;
    m.lag_order = j.at("p").get<std::size_t>();
    m.names = j.at("names").get<std::vector<std::string>>();
    m.intercepts = vector_from_json(j.at("alpha"));
    for (const auto& A : j.at("A")) m.lag_coeffs.push_back(matrix_from_json(A));
    m.sigma = matrix_from_json(j.at("sigma"));
    detail::require(m.lag_coeffs.size() == m.lag_order, ErrorKind::ConfigError,
                    "lag matrices do not match p");
    return m;
}

// ---- svr ----

inline json to_json(const svr::SvrConfig& c) {
    return json{{"C", c.C},
                {"gamma", c.gamma},
                {"epsilon", c.epsilon},
                {"tolerance", c.tolerance},
                {"max_iterations", c.max_iterations}};
}

inline svr::SvrConfig svr_config_from_json(const json& j, svr::SvrConfig base = {}) {
    if (j.contains("C")) base.C = j.at("C").get<double>();
    if (j.contains("gamma")) base.gamma = j.at("gamma").get<double>();
    if (j.contains("epsilon")) base.epsilon = j.at("epsilon").get<double>();
    if (j.contains("tolerance")) base.tolerance = j.at("tolerance").get<double>();
    if (j.contains("max_iterations"))
        base.max_iterations = j.at("max_iterations").get<std::size_t>();
    return base;
}

inline json to_json(const svr::SvrModel& m) {
    return json{{"config", to_json(m.config)},
                {"support_vectors", matrix_to_json(m.support_vectors)},
                {"dual_coefs", vector_to_json(m.dual_coefs)},
                {"bias", m.bias},
                {"degenerate", m.degenerate}};
}

inline svr::SvrModel svr_from_json(const json& j) {
    svr::SvrModel m;
    m.config = svr_config_from_json(j.at("config"));
    m.bias = j.at("bias").get<double>();
    m.degenerate = j.value("degenerate", false);
    const auto& sv = j.at("support_vectors");
    if (sv.empty()) {
        m.support_vectors.resize(0, 0);
        m.dual_coefs.resize(0);
    } else {
        m.support_vectors = matrix_from_json(sv);
        m.dual_coefs = vector_from_json(j.at("dual_coefs"));
    }
    return m;
}

// ---- lstm ----

inline json to_json(const lstm::LstmParams& p) {
    return json{{"input_dim", p.input_dim},
                {"hidden_dim", p.hidden_dim},
                {"output_dim", 1},
                {"output_gate_uses_current_cell", p.output_gate_uses_current_cell},
                {"W_xi", matrix_to_json(p.W_xi)}, {"W_hi", matrix_to_json(p.W_hi)},
                {"w_ci", vector_to_json(p.w_ci)}, {"b_i", vector_to_json(p.b_i)},
                {"W_xf", matrix_to_json(p.W_xf)}, {"W_hf", matrix_to_json(p.W_hf)},
                {"w_cf", vector_to_json(p.w_cf)}, {"b_f", vector_to_json(p.b_f)},
                {"W_xc", matrix_to_json(p.W_xc)}, {"W_hc", matrix_to_json(p.W_hc)},
                {"b_c", vector_to_json(p.b_c)},
                {"W_xo", matrix_to_json(p.W_xo)}, {"W_ho", matrix_to_json(p.W_ho)},
                {"w_co", vector_to_json(p.w_co)}, {"b_o", vector_to_json(p.b_o)},
                {"W_hy", vector_to_json(p.W_hy.transpose())},
                {"b_y", p.b_y}};
}

inline lstm::LstmParams lstm_from_json(const json& j) {
    lstm::LstmParams p(j.at("input_dim").get<Eigen::Index>(),
                       j.at("hidden_dim").get<Eigen::Index>());
    p.output_gate_uses_current_cell = j.value("output_gate_uses_current_cell", false);
    p.W_xi = matrix_from_json(j.at("W_xi"));
    p.W_hi = matrix_from_json(j.at("W_hi"));
    p.w_ci = vector_from_json(j.at("w_ci"));
    p.b_i = vector_from_json(j.at("b_i"));
    p.W_xf = matrix_from_json(j.at("W_xf"));
    p.W_hf = matrix_from_json(j.at("W_hf"));
    p.w_cf = vector_from_json(j.at("w_cf"));
    p.b_f = vector_from_json(j.at("b_f"));
    p.W_xc = matrix_from_json(j.at("W_xc"));
    p.W_hc = matrix_from_json(j.at("W_hc"));
    p.b_c = vector_from_json(j.at("b_c"));
    p.W_xo = matrix_from_json(j.at("W_xo"));
    p.W_ho = matrix_from_json(j.at("W_ho"));
    p.w_co = vector_from_json(j.at("w_co"));
    p.b_o = vector_from_json(j.at("b_o"));
    p.W_hy = vector_from_json(j.at("W_hy")).transpose();
    p.b_y = j.at("b_y").get<double>();
    return p;
}

// ---- metrics / analysis ----

inline json to_json(const metrics::MetricsReport& r) {
    return json{{"mape", r.mape},
                {"mpe", r.mpe},
                {"rmse", r.rmse},
                {"accuracy_pct", r.accuracy_pct},
                {"n", r.n}};
}

inline json to_json(const analysis::CorrelationMatrix& c) {
    return json{{"names", c.names}, {"values", matrix_to_json(c.values)}};
}

inline json to_json(const analysis::ImportanceReport& r) {
    return json{{"names", r.names},
                {"importances", r.importances},
                {"trees", r.trees},
                {"seed", r.seed}};
}

}  // namespace fxlab
