#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace proxfwi::cli {

namespace {

struct DigestContext {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

    DigestContext()
    {
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
            throw Error("SHA-256 initialization failed");
        }
    }
    void update(const void* bytes, std::size_t n)
    {
        if (EVP_DigestUpdate(ctx.get(), bytes, n) != 1) {
            throw Error("SHA-256 update failed");
        }
    }
    std::string hex()
    {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
            throw Error("SHA-256 finalization failed");
        }
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += digits[md[i] >> 4];
            out += digits[md[i] & 15];
        }
        return out;
    }
};

} // namespace

std::string sha256_hex(const void* bytes, std::size_t size)
{
    DigestContext d;
    d.update(bytes, size);
    return d.hex();
}

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string() + " for hashing");
    }
    DigestContext d;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        d.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return d.hex();
}

Manifest::Manifest(std::string command) { entries_.emplace_back("command", std::move(command)); }

void Manifest::set(const std::string& key, const std::string& value)
{
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
        throw DomainError("manifest entries must be single-line key=value pairs");
    }
    entries_.emplace_back(key, value);
}

void Manifest::input(const std::string& name, const std::filesystem::path& path)
{
    set("input." + name, path.string());
    set("input." + name + ".sha256", sha256_file(path));
}

void Manifest::output(const std::string& name, const std::filesystem::path& path)
{
    set("output." + name, path.string());
    set("output." + name + ".sha256", sha256_file(path));
}

void Manifest::write(const std::filesystem::path& path) const
{
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw FormatError("cannot write " + tmp.string());
        }
        for (const auto& [k, v] : entries_) {
            out << k << '=' << v << '\n';
        }
        if (!out.flush()) {
            throw FormatError("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::vector<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open manifest " + path.string());
    }
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("manifest " + path.string() + ": line without '='");
        }
        out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return out;
}

std::string pgm_bytes(const Eigen::VectorXd& values, int nz, int nx, double vmin, double vmax)
{
    if (!(vmin < vmax)) {
        throw UsageError("preview: vmin must be below vmax");
    }
    if (nz < 1 || nx < 1 || values.size() != static_cast<Eigen::Index>(nz) * nx) {
        throw GeometryError("preview: value count does not match the grid");
    }
    std::string out = "P5\n" + std::to_string(nx) + " " + std::to_string(nz) + "\n255\n";
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double t = std::round(255.0 * (values[i] - vmin) / (vmax - vmin));
        out += static_cast<char>(static_cast<unsigned char>(std::clamp(t, 0.0, 255.0)));
    }
    return out;
}

} // namespace proxfwi::cli
