#pragma once

// File formats for the command-line tool: RFC-4180 CSV for matrices and run
// tables, JSON (nlohmann) for structured results and the run manifest.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "nigmix/bench.hpp"
#include "nigmix/datagen.hpp"
#include "nigmix/eval.hpp"
#include "nigmix/model.hpp"
#include "nigmix/priors.hpp"

namespace nigmix::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "0.1.0";

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Text helpers
// ---------------------------------------------------------------------------

/// Shortest representation that round-trips.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ValidationError(where + ": cannot parse number '" + std::string(s) + "'");
    }
    return value;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

/// Splits one CSV record; handles quoted fields without embedded newlines.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (in.bad()) throw IoError("error reading " + path.string());
    return lines;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("error writing " + path.string());
}

// ---------------------------------------------------------------------------
// CSV payloads
// ---------------------------------------------------------------------------

inline std::string matrix_csv(const Matrix& x) {
    std::ostringstream out;
    for (Eigen::Index k = 0; k < x.cols(); ++k) out << (k ? "," : "") << "x" << (k + 1);
    out << "\r\n";
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) out << (k ? "," : "") << format_double(x(i, k));
        out << "\r\n";
    }
    return out.str();
}

/// Numeric CSV with a header row. Every row must match the header width.
inline Matrix read_matrix_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.size() < 2) throw ValidationError(path.string() + ": needs a header and at least one row");
    const std::size_t cols = split_csv_line(lines[0]).size();
    Matrix x(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto fields = split_csv_line(lines[r]);
        const std::string where = path.string() + ":" + std::to_string(r + 1);
        if (fields.size() != cols) throw ValidationError(where + ": expected " + std::to_string(cols) + " fields");
        for (std::size_t k = 0; k < cols; ++k) {
            x(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(k)) = parse_double(fields[k], where);
        }
    }
    return x;
}

inline std::string labels_csv(const std::vector<int>& labels) {
    std::ostringstream out;
    out << "label\r\n";
    for (int l : labels) out << l << "\r\n";
    return out.str();
}

inline std::vector<int> read_labels_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw ValidationError(path.string() + ": empty label file");
    std::vector<int> labels;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::string& s = lines[r];
        int v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw ValidationError(path.string() + ":" + std::to_string(r + 1) + ": bad label '" + s + "'");
        }
        labels.push_back(v);
    }
    return labels;
}

inline std::string runs_csv(const std::vector<RestartOutcome>& runs, std::size_t best) {
    std::ostringstream out;
    out << "dataset,variant,concentration,seed,ari,n_clusters,elbo,iterations,wall_time,best,error\r\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const RunRecord& rec = runs[r].record;
        out << csv_field(rec.dataset) << ',' << to_string(rec.variant) << ',' << to_string(rec.concentration) << ','
            << rec.seed << ',' << format_double(rec.ari) << ',' << rec.n_clusters << ',' << format_double(rec.elbo)
            << ',' << rec.iterations << ',' << format_double(rec.wall_time) << ',' << (r == best ? 1 : 0) << ','
            << csv_field(runs[r].error) << "\r\n";
    }
    return out.str();
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "dataset,lambda_star,sigma_beta,dataset_index,dataset_seed,variant,concentration,seed,ari,n_clusters,"
           "elbo,iterations,wall_time,best,error\r\n";
    for (const BenchRow& row : rows) {
        const RunRecord& rec = row.record;
        out << csv_field(rec.dataset) << ',' << format_double(row.lambda_star) << ','
            << format_double(row.sigma_beta) << ',' << row.dataset_index << ',' << row.dataset_seed << ','
            << to_string(rec.variant) << ',' << to_string(rec.concentration) << ',' << rec.seed << ','
            << format_double(rec.ari) << ',' << rec.n_clusters << ',' << format_double(rec.elbo) << ','
            << rec.iterations << ',' << format_double(rec.wall_time) << ',' << (row.best ? 1 : 0) << ','
            << csv_field(row.error) << "\r\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline json to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline json to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
    return out;
}

inline Vector vector_from_json(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
    return v;
}

inline Matrix matrix_from_json(const json& j) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows ? j.at(0).size() : 0;
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) throw ValidationError("ragged matrix in JSON");
        for (std::size_t k = 0; k < cols; ++k) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j.at(i).at(k).get<double>();
        }
    }
    return m;
}

/// Non-finite doubles are not valid JSON numbers; they become strings.
inline json number_or_string(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

inline json prior_to_json(const PriorConfig& p) {
    json j;
    j["eta_mu"] = p.eta_mu;
    j["eta_tau"] = p.eta_tau;
    j["eta_beta"] = p.eta_beta;
    j["xi"] = p.xi;
    j["lambda0"] = p.lambda0;
    j["nu_tau"] = p.nu_tau ? json(*p.nu_tau) : json(nullptr);
    j["nu_lambda"] = p.nu_lambda;
    j["l0"] = p.l0;
    j["r0"] = p.r0;
    j["trun_location"] = p.trun_location;
    return j;
}

inline PriorConfig prior_from_json(const json& j) {
    PriorConfig p;
    p.eta_mu = j.at("eta_mu").get<double>();
    p.eta_tau = j.at("eta_tau").get<double>();
    p.eta_beta = j.at("eta_beta").get<double>();
    p.xi = j.at("xi").get<double>();
    p.lambda0 = j.at("lambda0").get<double>();
    if (!j.at("nu_tau").is_null()) p.nu_tau = j.at("nu_tau").get<double>();
    p.nu_lambda = j.at("nu_lambda").get<double>();
    p.l0 = j.at("l0").get<double>();
    p.r0 = j.at("r0").get<double>();
    p.trun_location = j.at("trun_location").get<double>();
    return p;
}

inline json fit_config_to_json(const FitConfig& f) {
    json j;
    j["m0"] = f.m0;
    j["eps_z"] = f.eps_z;
    j["eps_dl"] = f.eps_dl_coeff;
    j["patience"] = f.patience;
    j["max_iter"] = f.max_iter;
    j["seed"] = f.seed;
    j["variant"] = std::string(to_string(f.variant));
    j["concentration"] = std::string(to_string(f.concentration));
    j["literal_lambda_update"] = f.literal_lambda_update;
    return j;
}

inline FitConfig fit_config_from_json(const json& j) {
    FitConfig f;
    f.m0 = j.at("m0").get<std::size_t>();
    f.eps_z = j.at("eps_z").get<double>();
    f.eps_dl_coeff = j.at("eps_dl").get<double>();
    f.patience = j.at("patience").get<std::size_t>();
    f.max_iter = j.at("max_iter").get<std::size_t>();
    f.seed = j.at("seed").get<std::uint64_t>();
    f.variant = parse_variant(j.at("variant").get<std::string>());
    f.concentration = parse_concentration(j.at("concentration").get<std::string>());
    f.literal_lambda_update = j.at("literal_lambda_update").get<bool>();
    return f;
}

inline json gen_config_to_json(const GenConfig& g) {
    json j;
    j["clusters"] = g.clusters;
    j["dim"] = g.dim;
    j["points"] = g.points;
    j["sigma"] = g.sigma;
    j["sigma_beta"] = g.sigma_beta;
    j["lambda_star"] = g.lambda_star;
    j["population"] = std::string(to_string(g.population));
    j["seed"] = g.seed;
    return j;
}

inline GenConfig gen_config_from_json(const json& j) {
    GenConfig g;
    g.clusters = j.at("clusters").get<int>();
    g.dim = j.at("dim").get<int>();
    g.points = j.at("points").get<int>();
    g.sigma = j.at("sigma").get<double>();
    g.sigma_beta = j.at("sigma_beta").get<double>();
    g.lambda_star = j.at("lambda_star").get<double>();
    g.population = parse_population(j.at("population").get<std::string>());
    g.seed = j.at("seed").get<std::uint64_t>();
    return g;
}

/// Everything needed to rerun a command. Output paths are stored as file
/// names so that the manifest does not depend on the output directory.
struct RunManifest {
    std::string command;
    std::string version = tool_version;
    std::optional<PriorConfig> prior;
    std::optional<FitConfig> fit;
    std::optional<GenConfig> gen;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    json extra = json::object();  ///< command-specific settings
};

inline json manifest_to_json(const RunManifest& m) {
    json j;
    j["tool"] = "nigmix";
    j["version"] = m.version;
    j["command"] = m.command;
    j["prior"] = m.prior ? prior_to_json(*m.prior) : json(nullptr);
    j["fit"] = m.fit ? fit_config_to_json(*m.fit) : json(nullptr);
    j["gen"] = m.gen ? gen_config_to_json(*m.gen) : json(nullptr);
    j["seeds"] = m.seeds;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["settings"] = m.extra;
    return j;
}

inline RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    if (!j.at("prior").is_null()) m.prior = prior_from_json(j.at("prior"));
    if (!j.at("fit").is_null()) m.fit = fit_config_from_json(j.at("fit"));
    if (!j.at("gen").is_null()) m.gen = gen_config_from_json(j.at("gen"));
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.extra = j.at("settings");
    return m;
}

inline json nig_params_to_json(const NigParams& p) {
    json j;
    j["mu"] = to_json(p.mu);
    j["beta"] = to_json(p.beta);
    j["tau"] = to_json(p.tau);
    j["lambda"] = p.lambda;
    return j;
}

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace nigmix::cli
