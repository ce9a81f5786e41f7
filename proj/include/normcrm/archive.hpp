#ifndef NORMCRM_ARCHIVE_HPP_
#define NORMCRM_ARCHIVE_HPP_

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "normcrm/crm.hpp"

namespace normcrm {

/// One kept Gibbs sweep: the latent u, the atom list (allocated atoms first,
/// then non-allocated), and the datum-to-atom allocation vector.
struct SweepRecord {
    long iteration = 0;
    double u = 0.0;
    int k = 0;     // number of allocated atoms
    int n_na = 0;  // number of non-allocated atoms
    double t_eps = 0.0;
    std::vector<double> jumps;
    std::vector<Location> locations;
    std::vector<int> allocations;
    std::vector<double> global;

    std::vector<int> cluster_sizes() const {
        std::vector<int> sizes(k, 0);
        for (int c : allocations) ++sizes[c];
        return sizes;
    }
};

namespace detail {

inline void append_real(std::string* line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), ",%.17g", v);
    *line += buf;
}

inline std::vector<std::string> split_line(const std::string& line) {
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

}  // namespace detail

/// Posterior sample archive, serialized as three CSV files per run directory:
/// chain.csv        iteration,k,u,n_na,t_eps[,g0..]      one row per kept sweep
/// atoms.csv        iteration,atom,jump,loc0..loc{D-1}   allocated atoms first
/// allocations.csv  iteration,c0..c{n-1}                 atom index per datum
/// Reals carry 17 significant digits and round-trip bit-exactly.
struct ChainArchive {
    int n_data = 0;
    int loc_dim = 0;
    int global_dim = 0;
    std::vector<SweepRecord> sweeps;

    std::size_t size() const { return sweeps.size(); }

    void save(const std::string& dir) const {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        std::ofstream chain(fs::path(dir) / "chain.csv");
        std::ofstream atoms(fs::path(dir) / "atoms.csv");
        std::ofstream alloc(fs::path(dir) / "allocations.csv");
        if (!chain || !atoms || !alloc) {
            throw std::runtime_error("ChainArchive::save: cannot write to " + dir);
        }
        chain << "iteration,k,u,n_na,t_eps";
        for (int g = 0; g < global_dim; ++g) chain << ",g" << g;
        chain << "\n";
        atoms << "iteration,atom,jump";
        for (int d = 0; d < loc_dim; ++d) atoms << ",loc" << d;
        atoms << "\n";
        alloc << "iteration";
        for (int i = 0; i < n_data; ++i) alloc << ",c" << i;
        alloc << "\n";
        for (const auto& s : sweeps) {
            std::string line = std::to_string(s.iteration) + "," + std::to_string(s.k);
            detail::append_real(&line, s.u);
            line += "," + std::to_string(s.n_na);
            detail::append_real(&line, s.t_eps);
            for (double g : s.global) detail::append_real(&line, g);
            chain << line << "\n";
            for (std::size_t j = 0; j < s.jumps.size(); ++j) {
                std::string arow =
                    std::to_string(s.iteration) + "," + std::to_string(j);
                detail::append_real(&arow, s.jumps[j]);
                for (double v : s.locations[j]) detail::append_real(&arow, v);
                atoms << arow << "\n";
            }
            std::string crow = std::to_string(s.iteration);
            for (int c : s.allocations) crow += "," + std::to_string(c);
            alloc << crow << "\n";
        }
    }

    static ChainArchive load(const std::string& dir) {
        namespace fs = std::filesystem;
        std::ifstream chain(fs::path(dir) / "chain.csv");
        std::ifstream atoms(fs::path(dir) / "atoms.csv");
        std::ifstream alloc(fs::path(dir) / "allocations.csv");
        if (!chain || !atoms || !alloc) {
            throw std::runtime_error("ChainArchive::load: missing archive files in " + dir);
        }
        ChainArchive out;
        std::string line;

        std::getline(chain, line);
        auto chain_header = detail::split_line(line);
        out.global_dim = static_cast<int>(chain_header.size()) - 5;
        while (std::getline(chain, line)) {
            if (line.empty()) continue;
            const auto f = detail::split_line(line);
            SweepRecord s;
            s.iteration = std::stol(f[0]);
            s.k = std::stoi(f[1]);
            s.u = std::strtod(f[2].c_str(), nullptr);
            s.n_na = std::stoi(f[3]);
            s.t_eps = std::strtod(f[4].c_str(), nullptr);
            for (int g = 0; g < out.global_dim; ++g) {
                s.global.push_back(std::strtod(f[5 + g].c_str(), nullptr));
            }
            out.sweeps.push_back(std::move(s));
        }

        std::getline(atoms, line);
        out.loc_dim = static_cast<int>(detail::split_line(line).size()) - 3;
        std::size_t idx = 0;
        while (std::getline(atoms, line)) {
            if (line.empty()) continue;
            const auto f = detail::split_line(line);
            const long it = std::stol(f[0]);
            while (idx < out.sweeps.size() && out.sweeps[idx].iteration != it) ++idx;
            if (idx >= out.sweeps.size()) {
                throw std::runtime_error("ChainArchive::load: stray atom row");
            }
            auto& s = out.sweeps[idx];
            s.jumps.push_back(std::strtod(f[2].c_str(), nullptr));
            Location loc(out.loc_dim);
            for (int d = 0; d < out.loc_dim; ++d) {
                loc[d] = std::strtod(f[3 + d].c_str(), nullptr);
            }
            s.locations.push_back(std::move(loc));
        }

        std::getline(alloc, line);
        out.n_data = static_cast<int>(detail::split_line(line).size()) - 1;
        idx = 0;
        while (std::getline(alloc, line)) {
            if (line.empty()) continue;
            const auto f = detail::split_line(line);
            const long it = std::stol(f[0]);
            while (idx < out.sweeps.size() && out.sweeps[idx].iteration != it) ++idx;
            if (idx >= out.sweeps.size()) {
                throw std::runtime_error("ChainArchive::load: stray allocation row");
            }
            auto& s = out.sweeps[idx];
            for (int i = 0; i < out.n_data; ++i) {
                s.allocations.push_back(std::stoi(f[1 + i]));
            }
        }
        return out;
    }
};

}  // namespace normcrm

#endif  // NORMCRM_ARCHIVE_HPP_
