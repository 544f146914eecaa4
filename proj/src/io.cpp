#include "tvfwi/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <map>

namespace tvfwi {

namespace {

constexpr char kModelMagic[16] = {'T', 'V', 'F', 'W', 'I', '-', 'M', 'O',
                                  'D', 'E', 'L', 0,   0,   0,   0,   0};
constexpr char kDataMagic[16] = {'T', 'V', 'F', 'W', 'I', '-', 'D', 'A',
                                 'T', 'A', 0,   0,   0,   0,   0,   0};

// The on-disk layout is little-endian fixed-width; this code assumes a
// little-endian host (checked once at file open).
bool host_is_little_endian() {
    const std::uint32_t probe = 1;
    unsigned char byte;
    std::memcpy(&byte, &probe, 1);
    return byte == 1;
}

void require_le() {
    if (!host_is_little_endian())
        throw IoError("binary file formats require a little-endian host");
}

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw IoError(std::string("truncated file while reading ") + what);
    return v;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    return in;
}

std::uintmax_t stream_size(std::ifstream& in) {
    in.seekg(0, std::ios::end);
    const auto n = in.tellg();
    in.seekg(0, std::ios::beg);
    return static_cast<std::uintmax_t>(n);
}

}  // namespace

ModelField StoredModel::as_slowness_sq() const {
    ModelField m(grid, values);
    if (unit == ModelUnit::velocity)
        for (double& v : m.values) v = velocity_to_slowness_sq(v);
    m.validate_positive();
    return m;
}

ModelField StoredModel::as_velocity() const {
    ModelField m(grid, values);
    if (unit == ModelUnit::slowness_sq)
        for (double& v : m.values) v = slowness_sq_to_velocity(v);
    return m;
}

void write_model(const std::string& path, const ModelField& m, ModelUnit unit) {
    require_le();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create file: " + path);
    out.write(kModelMagic, sizeof(kModelMagic));
    put(out, static_cast<std::uint32_t>(m.grid.nz));
    put(out, static_cast<std::uint32_t>(m.grid.nx));
    put(out, m.grid.h);
    put(out, static_cast<std::uint8_t>(unit));
    const char pad[7] = {};
    out.write(pad, sizeof(pad));
    if (unit == ModelUnit::slowness_sq) {
        out.write(reinterpret_cast<const char*>(m.values.data()),
                  static_cast<std::streamsize>(8 * m.values.size()));
    } else {
        for (double v : m.values) put(out, slowness_sq_to_velocity(v));
    }
    if (!out) throw IoError("write failed: " + path);
}

StoredModel read_model(const std::string& path) {
    require_le();
    std::ifstream in = open_input(path);
    const std::uintmax_t total = stream_size(in);

    char magic[16];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kModelMagic, 16) != 0)
        throw IoError("not a model file: " + path);

    StoredModel sm;
    const auto nz = get<std::uint32_t>(in, "nz");
    const auto nx = get<std::uint32_t>(in, "nx");
    const double h = get<double>(in, "h");
    const auto unit = get<std::uint8_t>(in, "unit");
    char pad[7];
    in.read(pad, sizeof(pad));
    if (!in) throw IoError("truncated model header: " + path);
    if (nz == 0 || nx == 0 || !(h > 0.0))
        throw IoError("invalid model header: " + path);
    if (unit > 1) throw IoError("unknown model unit tag: " + path);

    const std::uintmax_t expect =
        16 + 24 + 8 * static_cast<std::uintmax_t>(nz) * nx;
    if (total != expect)
        throw IoError("model file size mismatch: " + path);

    sm.grid = Grid(static_cast<int>(nz), static_cast<int>(nx), h);
    sm.unit = static_cast<ModelUnit>(unit);
    sm.values.resize(sm.grid.cells());
    in.read(reinterpret_cast<char*>(sm.values.data()),
            static_cast<std::streamsize>(8 * sm.values.size()));
    if (!in) throw IoError("truncated model payload: " + path);
    return sm;
}

void write_data(const std::string& path, const DataSet& data) {
    require_le();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create file: " + path);
    out.write(kDataMagic, sizeof(kDataMagic));
    put(out, static_cast<std::uint32_t>(data.n_freq()));
    put(out, static_cast<std::uint32_t>(data.n_src()));
    put(out, static_cast<std::uint32_t>(data.n_rec()));
    for (double f : data.frequencies) put(out, f);
    for (const Position& p : data.geometry.source_positions) {
        put(out, p.x);
        put(out, p.z);
    }
    for (const Position& p : data.geometry.receiver_positions) {
        put(out, p.x);
        put(out, p.z);
    }
    for (const Complex& v : data.values) {
        put(out, v.real());
        put(out, v.imag());
    }
    if (!out) throw IoError("write failed: " + path);
}

DataSet read_data(const std::string& path, const Grid& grid) {
    require_le();
    std::ifstream in = open_input(path);
    const std::uintmax_t total = stream_size(in);

    char magic[16];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kDataMagic, 16) != 0)
        throw IoError("not a data file: " + path);

    const auto n_freq = get<std::uint32_t>(in, "n_freq");
    const auto n_src = get<std::uint32_t>(in, "n_src");
    const auto n_rec = get<std::uint32_t>(in, "n_rec");

    const std::uintmax_t expect = 16 + 12 + 8ull * n_freq +
                                  16ull * (n_src + static_cast<std::uintmax_t>(n_rec)) +
                                  16ull * n_freq * n_src * n_rec;
    if (total != expect)
        throw IoError("data file size mismatch: " + path);

    DataSet d;
    d.geometry.grid = grid;
    d.frequencies.resize(n_freq);
    for (double& f : d.frequencies) f = get<double>(in, "frequency");
    d.geometry.source_positions.resize(n_src);
    for (Position& p : d.geometry.source_positions) {
        p.x = get<double>(in, "source x");
        p.z = get<double>(in, "source z");
    }
    d.geometry.receiver_positions.resize(n_rec);
    for (Position& p : d.geometry.receiver_positions) {
        p.x = get<double>(in, "receiver x");
        p.z = get<double>(in, "receiver z");
    }
    d.values.resize(static_cast<std::size_t>(n_freq) * n_src * n_rec);
    for (Complex& v : d.values) {
        const double re = get<double>(in, "value");
        const double im = get<double>(in, "value");
        v = Complex(re, im);
    }
    return d;
}

namespace {

using Section = std::map<std::string, std::string>;
using RawConfig = std::map<std::string, Section>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

RawConfig read_raw(std::istream& in) {
    static const char* kSections[] = {"grid",        "acquisition", "objective",
                                      "constraints", "sgp",         "pdhg",
                                      "schedule"};
    RawConfig raw;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw IoError("config line " + std::to_string(lineno) +
                              ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const char* s : kSections) known |= (section == s);
            if (!known)
                throw IoError("config line " + std::to_string(lineno) +
                              ": unknown section [" + section + "]");
            raw[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(lineno) +
                          ": expected key = value");
        if (section.empty())
            throw IoError("config line " + std::to_string(lineno) +
                          ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw IoError("config line " + std::to_string(lineno) +
                                       ": empty key");
        if (!raw[section].emplace(key, value).second)
            throw IoError("config: duplicate key '" + key + "' in [" + section + "]");
    }
    return raw;
}

// Pulls a key out of the section map; whatever remains unconsumed at the
// end is an unknown key.
std::optional<std::string> take(RawConfig& raw, const std::string& section,
                                const std::string& key) {
    auto sec = raw.find(section);
    if (sec == raw.end()) return std::nullopt;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    std::string v = it->second;
    sec->second.erase(it);
    return v;
}

double parse_double(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw IoError("config: bad number '" + v + "' for " + where);
    }
}

long parse_int(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw IoError("config: bad integer '" + v + "' for " + where);
    }
}

bool parse_bool(const std::string& v, const std::string& where) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw IoError("config: bad boolean '" + v + "' for " + where);
}

std::vector<double> parse_list(const std::string& v, const std::string& where) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        std::istringstream fields(item);
        std::string tok;
        while (fields >> tok) out.push_back(parse_double(tok, where));
    }
    if (out.empty()) throw IoError("config: empty list for " + where);
    return out;
}

void take_double(RawConfig& raw, const std::string& sec, const std::string& key,
                 double& dst) {
    if (auto v = take(raw, sec, key)) dst = parse_double(*v, "[" + sec + "] " + key);
}

void take_int(RawConfig& raw, const std::string& sec, const std::string& key,
              int& dst) {
    if (auto v = take(raw, sec, key))
        dst = static_cast<int>(parse_int(*v, "[" + sec + "] " + key));
}

void take_bool(RawConfig& raw, const std::string& sec, const std::string& key,
               bool& dst) {
    if (auto v = take(raw, sec, key)) dst = parse_bool(*v, "[" + sec + "] " + key);
}

// Per-pass lists broadcast: a single value applies to every pass.
std::optional<std::vector<double>> take_pass_list(RawConfig& raw,
                                                  const std::string& key,
                                                  std::size_t n_passes) {
    auto v = take(raw, "schedule", key);
    if (!v) return std::nullopt;
    std::vector<double> xs = parse_list(*v, "[schedule] " + key);
    if (xs.size() == 1) xs.assign(n_passes, xs[0]);
    if (xs.size() != n_passes)
        throw IoError("config: [schedule] " + key + " has " +
                      std::to_string(xs.size()) + " entries for " +
                      std::to_string(n_passes) + " passes");
    return xs;
}

}  // namespace

Config parse_config(std::istream& in) {
    RawConfig raw = read_raw(in);
    Config cfg;

    take_int(raw, "grid", "nz", cfg.nz);
    take_int(raw, "grid", "nx", cfg.nx);
    take_double(raw, "grid", "h", cfg.h);

    take_int(raw, "acquisition", "source_spacing", cfg.source_spacing);
    take_int(raw, "acquisition", "source_depth", cfg.source_depth);
    take_int(raw, "acquisition", "receiver_spacing", cfg.receiver_spacing);
    take_int(raw, "acquisition", "receiver_depth", cfg.receiver_depth);
    take_double(raw, "acquisition", "peak_frequency", cfg.peak_frequency);

    if (auto v = take(raw, "objective", "mode")) {
        if (*v == "fwi")
            cfg.mode = ObjectiveMode::fwi;
        else if (*v == "wri")
            cfg.mode = ObjectiveMode::wri;
        else
            throw IoError("config: [objective] mode must be fwi or wri, got '" +
                          *v + "'");
    }
    take_double(raw, "objective", "lambda", cfg.wri.lambda);
    take_bool(raw, "objective", "radiation_imag", cfg.eval_opts.radiation_imag);
    take_bool(raw, "objective", "flip_gradient_sign",
              cfg.eval_opts.flip_gradient_sign);

    take_double(raw, "constraints", "v_min", cfg.v_min);
    take_double(raw, "constraints", "v_max", cfg.v_max);

    take_double(raw, "sgp", "sigma", cfg.sgp.sigma);
    take_double(raw, "sgp", "xi1", cfg.sgp.xi1);
    take_double(raw, "sgp", "xi2", cfg.sgp.xi2);
    take_double(raw, "sgp", "rho", cfg.sgp.rho);
    take_double(raw, "sgp", "eps", cfg.sgp.eps);
    take_double(raw, "sgp", "c0", cfg.sgp.c0);
    take_int(raw, "sgp", "max_outer", cfg.sgp.max_outer);
    take_double(raw, "sgp", "nu_frac", cfg.sgp.nu_frac);
    take_bool(raw, "sgp", "warm_start_duals", cfg.sgp.warm_start_duals);
    if (auto v = take(raw, "sgp", "damping")) {
        if (*v == "additive")
            cfg.sgp.damping = DampingMode::additive;
        else if (*v == "multiplicative")
            cfg.sgp.damping = DampingMode::multiplicative;
        else
            throw IoError(
                "config: [sgp] damping must be additive or multiplicative, got '" +
                *v + "'");
    }

    take_double(raw, "pdhg", "alpha", cfg.sgp.pdhg.alpha);
    take_double(raw, "pdhg", "delta", cfg.sgp.pdhg.delta);
    take_double(raw, "pdhg", "tol", cfg.sgp.pdhg.tol);
    take_int(raw, "pdhg", "max_iters", cfg.sgp.pdhg.max_iters);

    if (auto v = take(raw, "schedule", "frequencies"))
        cfg.frequencies = parse_list(*v, "[schedule] frequencies");

    int n_passes = 1;
    take_int(raw, "schedule", "passes", n_passes);
    if (n_passes < 1) throw IoError("config: [schedule] passes must be >= 1");
    cfg.passes.assign(static_cast<std::size_t>(n_passes), PassSpec{});
    const auto n = static_cast<std::size_t>(n_passes);
    if (auto xs = take_pass_list(raw, "tau", n))
        for (std::size_t i = 0; i < n; ++i) cfg.passes[i].tau = (*xs)[i];
    if (auto xs = take_pass_list(raw, "tau_frac", n))
        for (std::size_t i = 0; i < n; ++i) cfg.passes[i].tau_frac = (*xs)[i];
    if (auto xs = take_pass_list(raw, "xi", n))
        for (std::size_t i = 0; i < n; ++i) cfg.passes[i].xi = (*xs)[i];
    if (auto xs = take_pass_list(raw, "xi_frac", n))
        for (std::size_t i = 0; i < n; ++i) cfg.passes[i].xi_frac = (*xs)[i];

    take_bool(raw, "schedule", "encoding", cfg.encoding.enabled);
    if (auto v = take(raw, "schedule", "supershots")) {
        const long s = parse_int(*v, "[schedule] supershots");
        if (s < 1) throw IoError("config: [schedule] supershots must be >= 1");
        cfg.encoding.n_super = static_cast<std::size_t>(s);
    }
    if (auto v = take(raw, "schedule", "seed"))
        cfg.encoding.seed =
            static_cast<std::uint64_t>(parse_int(*v, "[schedule] seed"));

    for (const auto& [section, keys] : raw)
        for (const auto& [key, value] : keys)
            throw IoError("config: unknown key '" + key + "' in [" + section + "]");

    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    return parse_config(in);
}

Geometry Config::geometry(const Grid& g) const {
    Geometry geom;
    geom.grid = g;
    for (int l = source_spacing / 2; l < g.nx; l += source_spacing)
        geom.source_positions.push_back({l * g.h, source_depth * g.h});
    for (int l = 0; l < g.nx; l += receiver_spacing)
        geom.receiver_positions.push_back({l * g.h, receiver_depth * g.h});
    geom.validate();
    return geom;
}

InversionPlan Config::plan() const {
    InversionPlan p;
    p.mode = mode;
    p.wri = wri;
    p.frequencies = frequencies;
    p.passes = passes;
    p.encoding = encoding;
    p.v_min = v_min;
    p.v_max = v_max;
    p.sgp = sgp;
    p.eval_opts = eval_opts;
    return p;
}

std::string serialize_config(const Config& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << "[grid]\n"
       << "nz = " << cfg.nz << "\n"
       << "nx = " << cfg.nx << "\n"
       << "h = " << cfg.h << "\n\n";
    os << "[acquisition]\n"
       << "source_spacing = " << cfg.source_spacing << "\n"
       << "source_depth = " << cfg.source_depth << "\n"
       << "receiver_spacing = " << cfg.receiver_spacing << "\n"
       << "receiver_depth = " << cfg.receiver_depth << "\n"
       << "peak_frequency = " << cfg.peak_frequency << "\n\n";
    os << "[objective]\n"
       << "mode = " << (cfg.mode == ObjectiveMode::fwi ? "fwi" : "wri") << "\n"
       << "lambda = " << cfg.wri.lambda << "\n"
       << "radiation_imag = " << (cfg.eval_opts.radiation_imag ? "true" : "false")
       << "\n"
       << "flip_gradient_sign = "
       << (cfg.eval_opts.flip_gradient_sign ? "true" : "false") << "\n\n";
    os << "[constraints]\n"
       << "v_min = " << cfg.v_min << "\n"
       << "v_max = " << cfg.v_max << "\n\n";
    os << "[sgp]\n"
       << "sigma = " << cfg.sgp.sigma << "\n"
       << "xi1 = " << cfg.sgp.xi1 << "\n"
       << "xi2 = " << cfg.sgp.xi2 << "\n"
       << "rho = " << cfg.sgp.rho << "\n"
       << "eps = " << cfg.sgp.eps << "\n"
       << "c0 = " << cfg.sgp.c0 << "\n"
       << "max_outer = " << cfg.sgp.max_outer << "\n"
       << "damping = "
       << (cfg.sgp.damping == DampingMode::additive ? "additive" : "multiplicative")
       << "\n"
       << "nu_frac = " << cfg.sgp.nu_frac << "\n"
       << "warm_start_duals = " << (cfg.sgp.warm_start_duals ? "true" : "false")
       << "\n\n";
    os << "[pdhg]\n"
       << "alpha = " << cfg.sgp.pdhg.alpha << "\n"
       << "delta = " << cfg.sgp.pdhg.delta << "\n"
       << "tol = " << cfg.sgp.pdhg.tol << "\n"
       << "max_iters = " << cfg.sgp.pdhg.max_iters << "\n\n";
    os << "[schedule]\n";
    if (!cfg.frequencies.empty()) {
        os << "frequencies =";
        for (double f : cfg.frequencies) os << ' ' << f;
        os << "\n";
    }
    os << "passes = " << cfg.passes.size() << "\n";
    auto emit_list = [&](const char* key, auto getter) {
        bool any = false;
        for (const PassSpec& p : cfg.passes) any |= getter(p).has_value();
        if (!any) return;
        os << key << " =";
        for (const PassSpec& p : cfg.passes) {
            const auto v = getter(p);
            if (!v)
                throw IoError(std::string("serialize: ragged per-pass list for ") +
                              key);
            os << ' ' << *v;
        }
        os << "\n";
    };
    emit_list("tau", [](const PassSpec& p) { return p.tau; });
    emit_list("tau_frac", [](const PassSpec& p) { return p.tau_frac; });
    emit_list("xi", [](const PassSpec& p) { return p.xi; });
    emit_list("xi_frac", [](const PassSpec& p) { return p.xi_frac; });
    os << "encoding = " << (cfg.encoding.enabled ? "true" : "false") << "\n"
       << "supershots = " << cfg.encoding.n_super << "\n"
       << "seed = " << cfg.encoding.seed << "\n";
    return os.str();
}

}  // namespace tvfwi
