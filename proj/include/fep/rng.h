#ifndef FEP_RNG_H
#define FEP_RNG_H

#include <bit>
#include <cstdint>
#include <random>
#include <string_view>

namespace fep
{

/// Independent stream derived from (root seed, purpose, index). Doubles are
/// built from the raw 64-bit output so results do not depend on the standard
/// library's distribution implementations.
class RandomStream
{
  public:
    RandomStream(std::uint64_t rootSeed, std::string_view purpose, std::uint64_t index = 0)
        : m_engine(Derive(rootSeed, purpose, index))
    {
    }

    /// Uniform on [0, 1).
    double Uniform()
    {
        return static_cast<double>(m_engine() >> 11) * 0x1.0p-53;
    }

    double Uniform(double lo, double hi)
    {
        return lo + (hi - lo) * Uniform();
    }

    /// Uniform integer on [0, n).
    std::uint64_t Below(std::uint64_t n)
    {
        return static_cast<std::uint64_t>(Uniform() * static_cast<double>(n));
    }

  private:
    static std::uint64_t SplitMix(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t Derive(std::uint64_t root, std::string_view purpose, std::uint64_t index)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : purpose)
        {
            h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
        }
        return SplitMix(SplitMix(root ^ h) + index);
    }

    std::mt19937_64 m_engine;
};

/// 64-bit FNV-1a accumulator for trace fingerprints.
class TraceHash
{
  public:
    void Add(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
        {
            m_h = (m_h ^ ((v >> (8 * i)) & 0xff)) * 0x100000001b3ULL;
        }
    }

    void Add(double v)
    {
        Add(std::bit_cast<std::uint64_t>(v));
    }

    std::uint64_t Value() const
    {
        return m_h;
    }

  private:
    std::uint64_t m_h = 0xcbf29ce484222325ULL;
};

} // namespace fep

#endif // FEP_RNG_H
