#pragma once

#include "lafb/network.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace lafb {

inline constexpr char kCheckpointMagic[8] = {'L', 'A', 'F', 'B', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& is, const std::string& path)
{
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("checkpoint " + path + ": truncated file");
    return v;
}

inline std::string take_string(std::istream& is, const std::string& path)
{
    const auto n = take<std::uint32_t>(is, path);
    if (n > (1u << 24)) throw IoError("checkpoint " + path + ": corrupt string length");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n)) throw IoError("checkpoint " + path + ": truncated file");
    return s;
}

inline void put_string(std::ostream& os, const std::string& s)
{
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace detail

/// Human-readable summary written next to every checkpoint.
inline std::string checkpoint_manifest(const Model& m)
{
    const ParamStore& p = m.params();
    std::ostringstream os;
    os << "[model]\n" << m.config().to_kv().str();
    os << "\n[counts]\n";
    os << "params_total = " << p.count() << '\n';
    os << "params_encoder = " << p.count("enc.") << '\n';
    os << "params_fusion_bank = " << p.count("bank.") << '\n';
    os << "params_iigm = " << p.count("iigm.") << '\n';
    os << "params_decoder = " << p.count("dec.") << '\n';
    os << "\n# name shape\n";
    for (std::size_t i = 0; i < p.size(); ++i) os << "# " << p.name(i) << ' ' << shape_str(p.value(i).shape()) << '\n';
    return os.str();
}

/// Binary layout: magic, u32 version, config text, u32 count, then per tensor
/// name, u32 rank, u64 dims, raw little-endian doubles.
inline void save_checkpoint(const Model& m, const std::string& path)
{
    {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write checkpoint " + path);
        os.write(kCheckpointMagic, sizeof kCheckpointMagic);
        detail::put<std::uint32_t>(os, kCheckpointVersion);
        detail::put_string(os, m.config().to_kv().str());
        const ParamStore& p = m.params();
        detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(p.size()));
        for (std::size_t i = 0; i < p.size(); ++i) {
            const Tensor& t = p.value(i);
            detail::put_string(os, p.name(i));
            detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
            for (std::size_t d : t.shape()) detail::put<std::uint64_t>(os, d);
            os.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(double)));
        }
        if (!os) throw IoError("failed writing checkpoint " + path);
    }
    std::ofstream man(path + ".manifest", std::ios::trunc);
    if (!man) throw IoError("cannot write manifest " + path + ".manifest");
    man << checkpoint_manifest(m);
}

inline Model load_checkpoint(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint " + path);
    char magic[sizeof kCheckpointMagic];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw IoError("checkpoint " + path + ": bad magic");
    const auto version = detail::take<std::uint32_t>(is, path);
    if (version != kCheckpointVersion)
        throw IoError("checkpoint " + path + ": unsupported version " + std::to_string(version));
    Model m(ModelConfig::from_kv(KeyValues::parse(detail::take_string(is, path), path)));
    ParamStore& p = m.params();
    const auto count = detail::take<std::uint32_t>(is, path);
    if (count != p.size())
        throw ConfigError("checkpoint " + path + ": holds " + std::to_string(count) + " tensors, model expects " +
                          std::to_string(p.size()));
    for (std::size_t i = 0; i < count; ++i) {
        const std::string name = detail::take_string(is, path);
        if (name != p.name(i))
            throw ConfigError("checkpoint " + path + ": tensor " + std::to_string(i) + " is '" + name + "', expected '" +
                              p.name(i) + "'");
        const auto rank = detail::take<std::uint32_t>(is, path);
        Shape shape;
        for (std::uint32_t r = 0; r < rank && r < 8; ++r) shape.push_back(detail::take<std::uint64_t>(is, path));
        Tensor& t = p.value(i);
        if (shape != t.shape())
            throw ConfigError("checkpoint " + path + ": tensor '" + name + "' has shape " + shape_str(shape) +
                              ", expected " + shape_str(t.shape()));
        if (!is.read(reinterpret_cast<char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(double))))
            throw IoError("checkpoint " + path + ": truncated file");
    }
    return m;
}

}  // namespace lafb
