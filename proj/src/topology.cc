#include "fep/topology.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fep
{

double
Distance(const Vec2& a, const Vec2& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

bool
LinkUp(const Vec2& a, double rangeA, const Vec2& b, double rangeB)
{
    return Distance(a, b) <= std::min(rangeA, rangeB);
}

RandomWaypoint::RandomWaypoint(Vec2 start,
                               double arenaWidth,
                               double arenaHeight,
                               double speedMin,
                               double speedMax,
                               RandomStream stream)
    : m_pos(start),
      m_waypoint(start),
      m_width(arenaWidth),
      m_height(arenaHeight),
      m_speedMin(speedMin),
      m_speedMax(speedMax),
      m_stream(stream)
{
    NextLeg();
}

void
RandomWaypoint::NextLeg()
{
    m_waypoint = Vec2{m_stream.Uniform(0.0, m_width), m_stream.Uniform(0.0, m_height)};
    m_speed = m_stream.Uniform(m_speedMin, m_speedMax);
}

void
RandomWaypoint::Advance(double dtMs)
{
    double budget = m_speed * dtMs / 1000.0;
    // Bounded so a run of zero-length legs cannot spin forever.
    for (int legs = 0; budget > 0.0 && legs < 64; ++legs)
    {
        const double d = Distance(m_pos, m_waypoint);
        if (d > budget)
        {
            const double f = budget / d;
            m_pos.x += (m_waypoint.x - m_pos.x) * f;
            m_pos.y += (m_waypoint.y - m_pos.y) * f;
            return;
        }
        m_pos = m_waypoint;
        // Leftover distance is spent at the new leg's speed.
        const double leftoverS = m_speed > 0.0 ? (budget - d) / m_speed : 0.0;
        NextLeg();
        budget = leftoverS * m_speed;
    }
}

UnionFind::UnionFind(std::size_t n)
    : m_parent(n),
      m_size(n, 1)
{
    std::iota(m_parent.begin(), m_parent.end(), std::size_t{0});
}

std::size_t
UnionFind::Find(std::size_t x)
{
    while (m_parent[x] != x)
    {
        m_parent[x] = m_parent[m_parent[x]];
        x = m_parent[x];
    }
    return x;
}

bool
UnionFind::Unite(std::size_t a, std::size_t b)
{
    a = Find(a);
    b = Find(b);
    if (a == b)
    {
        return false;
    }
    if (m_size[a] < m_size[b])
    {
        std::swap(a, b);
    }
    m_parent[b] = a;
    m_size[a] += m_size[b];
    return true;
}

int
CountComponents(const std::vector<bool>& alive,
                const std::function<bool(std::size_t, std::size_t)>& linked)
{
    const std::size_t n = alive.size();
    UnionFind uf(n);
    int components = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (alive[i])
        {
            ++components;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!alive[i])
            continue;
        for (std::size_t j = i + 1; j < n; ++j)
        {
            if (alive[j] && linked(i, j) && uf.Unite(i, j))
            {
                --components;
            }
        }
    }
    return components;
}

} // namespace fep
