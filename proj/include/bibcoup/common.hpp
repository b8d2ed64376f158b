#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bibcoup {

// Error categories map onto the CLI exit codes (1/2/3).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NetworkError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string ascii_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Whole file as a string. Throws IoError.
std::string read_text_file(const std::string& path);
/// All lines, \n-separated, trailing \r stripped. Throws IoError.
std::vector<std::string> read_lines(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// SHA-256 of a file's bytes, lowercase hex. Throws IoError.
std::string sha256_file(const std::string& path);

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

/// Seeded RNG with explicitly defined draws. std::shuffle and the standard
/// distributions are implementation-defined, which would break byte-stable
/// artifacts across toolchains; every randomized routine in the library
/// draws through this wrapper instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace bibcoup
