#ifndef NORMCRM_DATASET_HPP_
#define NORMCRM_DATASET_HPP_

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "normcrm/random.hpp"

namespace normcrm {

/// In-memory numeric dataset: a response column plus optional covariates.
struct Dataset {
    std::vector<double> y;
    std::vector<std::vector<double>> x;  // one row per observation, p columns
    std::string response_name = "y";
    std::vector<std::string> covariate_names;
    std::vector<long> rejected_rows;  // 1-based data rows dropped for NA cells

    int n() const { return static_cast<int>(y.size()); }
    int p() const { return static_cast<int>(covariate_names.size()); }

    double mean_y() const {
        double m = 0.0;
        for (double v : y) m += v;
        return m / y.size();
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline bool is_na_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

}  // namespace detail

/// Loads a comma-separated file with a header row. Rows with NA cells in the
/// requested columns are dropped and recorded; any other non-numeric cell is a
/// parse error naming its row and column.
inline Dataset ingest_csv(const std::string& path, const std::string& response_column,
                          const std::vector<std::string>& covariate_columns = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ingest_csv: empty file " + path);
    const auto header = detail::split_csv_line(line);
    auto col_index = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (detail::trim(header[j]) == name) return static_cast<long>(j);
        }
        return -1L;
    };
    const long y_col = col_index(response_column);
    if (y_col < 0) {
        throw std::runtime_error("ingest_csv: missing response column '" +
                                 response_column + "' in " + path);
    }
    std::vector<long> x_cols;
    for (const auto& name : covariate_columns) {
        const long j = col_index(name);
        if (j < 0) {
            throw std::runtime_error("ingest_csv: missing covariate column '" + name +
                                     "' in " + path);
        }
        x_cols.push_back(j);
    }

    Dataset ds;
    ds.response_name = response_column;
    ds.covariate_names = covariate_columns;
    long row = 1;  // data rows, header excluded
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        auto cell = [&](long j) -> std::string {
            if (j >= static_cast<long>(cells.size())) {
                throw std::runtime_error("ingest_csv: row " + std::to_string(row) +
                                         " has too few columns");
            }
            return detail::trim(cells[j]);
        };
        bool has_na = detail::is_na_token(cell(y_col));
        for (long j : x_cols) has_na = has_na || detail::is_na_token(cell(j));
        if (has_na) {
            ds.rejected_rows.push_back(row);
            ++row;
            continue;
        }
        auto parse = [&](long j, const std::string& colname) {
            const std::string s = cell(j);
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end == s.c_str() || *end != '\0') {
                throw std::runtime_error("ingest_csv: non-numeric cell '" + s +
                                         "' at row " + std::to_string(row) +
                                         ", column '" + colname + "'");
            }
            return v;
        };
        ds.y.push_back(parse(y_col, response_column));
        std::vector<double> xr;
        xr.reserve(x_cols.size());
        for (std::size_t j = 0; j < x_cols.size(); ++j) {
            xr.push_back(parse(x_cols[j], covariate_columns[j]));
        }
        ds.x.push_back(std::move(xr));
        ++row;
    }
    return ds;
}

/// n = 1000 draws from the five-component Gaussian reference mixture with
/// (mean, sd) pairs (15,1.1), (50,1), (20,4), (30,5), (40,5) and weights
/// proportional to 10, 9, 4, 5, 5.
inline Dataset simulate_reference_data(std::uint64_t seed) {
    static const double kMeans[5] = {15.0, 50.0, 20.0, 30.0, 40.0};
    static const double kSds[5] = {1.1, 1.0, 4.0, 5.0, 5.0};
    static const double kWeights[5] = {10.0, 9.0, 4.0, 5.0, 5.0};
    Dataset ds;
    ds.response_name = "y";
    Rng rng(seed);
    double total = 0.0;
    for (double w : kWeights) total += w;
    for (int i = 0; i < 1000; ++i) {
        double u = draw_uniform(rng) * total;
        int c = 0;
        while (c < 4 && u > kWeights[c]) {
            u -= kWeights[c];
            ++c;
        }
        ds.y.push_back(draw_normal(kMeans[c], kSds[c], rng));
        ds.x.emplace_back();
    }
    return ds;
}

/// Density of the reference mixture (for goodness-of-fit comparisons).
inline double reference_mixture_density(double yv) {
    static const double kMeans[5] = {15.0, 50.0, 20.0, 30.0, 40.0};
    static const double kSds[5] = {1.1, 1.0, 4.0, 5.0, 5.0};
    static const double kWeights[5] = {10.0, 9.0, 4.0, 5.0, 5.0};
    double dens = 0.0;
    for (int c = 0; c < 5; ++c) {
        const double z = (yv - kMeans[c]) / kSds[c];
        dens += kWeights[c] / 33.0 * std::exp(-0.5 * z * z) /
                (kSds[c] * std::sqrt(2.0 * M_PI));
    }
    return dens;
}

}  // namespace normcrm

#endif  // NORMCRM_DATASET_HPP_
