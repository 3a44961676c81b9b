#ifndef FEP_TOPOLOGY_H
#define FEP_TOPOLOGY_H

// Positions, random waypoint motion, the disc link rule and partition counting.

#include "fep/rng.h"
#include "fep/types.h"

#include <functional>
#include <vector>

namespace fep
{

struct Vec2
{
    double x = 0.0;
    double y = 0.0;
};

double Distance(const Vec2& a, const Vec2& b);

/// Bidirectional disc model: the shorter of the two ranges decides.
bool LinkUp(const Vec2& a, double rangeA, const Vec2& b, double rangeB);

/// Random waypoint with zero pause time. A node that reaches its waypoint
/// mid-step spends the rest of the step heading for a fresh waypoint.
class RandomWaypoint
{
  public:
    RandomWaypoint(Vec2 start,
                   double arenaWidth,
                   double arenaHeight,
                   double speedMin,
                   double speedMax,
                   RandomStream stream);

    void Advance(double dtMs);

    const Vec2& Position() const
    {
        return m_pos;
    }

    const Vec2& Waypoint() const
    {
        return m_waypoint;
    }

    /// Metres per second.
    double Speed() const
    {
        return m_speed;
    }

  private:
    void NextLeg();

    Vec2 m_pos;
    Vec2 m_waypoint;
    double m_speed = 0.0;
    double m_width;
    double m_height;
    double m_speedMin;
    double m_speedMax;
    RandomStream m_stream;
};

/// Disjoint-set forest with path halving and union by size.
class UnionFind
{
  public:
    explicit UnionFind(std::size_t n);
    std::size_t Find(std::size_t x);
    bool Unite(std::size_t a, std::size_t b);

  private:
    std::vector<std::size_t> m_parent;
    std::vector<std::size_t> m_size;
};

/// Connected components among the nodes flagged alive; 0 when none is alive.
int CountComponents(const std::vector<bool>& alive,
                    const std::function<bool(std::size_t, std::size_t)>& linked);

} // namespace fep

#endif // FEP_TOPOLOGY_H
