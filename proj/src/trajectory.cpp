#include "optocool/trajectory.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace optocool {

namespace {

constexpr char k_magic[8] = {'O', 'C', 'T', 'R', 'J', '1', 0, 0};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_series(std::ostream& os, const std::string& name,
                  const std::vector<double>& data) {
    write_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
}

}  // namespace

void Trajectory::save_binary(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(k_magic, sizeof k_magic);
    os.write(reinterpret_cast<const char*>(&dt), sizeof dt);

    std::vector<std::pair<std::string, const std::vector<double>*>> series = {
        {"x", &x}, {"v", &v}, {"y", &y}};
    if (has_atom_mode()) {
        series.emplace_back("x_a", &x_a);
        series.emplace_back("v_a", &v_a);
    }
    write_u64(os, series.size());
    write_u64(os, size());
    for (const auto& [name, data] : series) write_series(os, name, *data);
    if (!os) throw std::runtime_error("write failed for " + path);
}

Trajectory Trajectory::load_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[8] = {};
    is.read(magic, sizeof magic);
    if (std::string(magic, 6) != "OCTRJ1") throw std::runtime_error("bad trajectory magic");

    Trajectory out;
    is.read(reinterpret_cast<char*>(&out.dt), sizeof out.dt);
    const std::uint64_t n_series = read_u64(is);
    const std::uint64_t n = read_u64(is);
    for (std::uint64_t s = 0; s < n_series; ++s) {
        const std::uint64_t name_len = read_u64(is);
        std::string name(name_len, '\0');
        is.read(name.data(), static_cast<std::streamsize>(name_len));
        std::vector<double> data(n);
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (name == "x") out.x = std::move(data);
        else if (name == "v") out.v = std::move(data);
        else if (name == "y") out.y = std::move(data);
        else if (name == "x_a") out.x_a = std::move(data);
        else if (name == "v_a") out.v_a = std::move(data);
        else throw std::runtime_error("unknown series '" + name + "' in " + path);
    }
    if (!is) throw std::runtime_error("truncated trajectory file " + path);
    return out;
}

void Trajectory::save_csv(const std::string& path, const std::string& provenance) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.precision(12);
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "t_s,x_m,v_m_per_s,y_m";
    if (has_atom_mode()) os << ",x_a_m,v_a_m_per_s";
    os << "\n";
    for (std::size_t i = 0; i < size(); ++i) {
        os << static_cast<double>(i) * dt << ',' << x[i] << ',' << v[i] << ',' << y[i];
        if (has_atom_mode()) os << ',' << x_a[i] << ',' << v_a[i];
        os << '\n';
    }
}

}  // namespace optocool
