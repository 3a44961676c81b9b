#ifndef FEP_EVENT_LOG_H
#define FEP_EVENT_LOG_H

// JSON-lines run log: {"time", "seq", "kind", "node", "payload"} per record.

#include "fep/types.h"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace fep
{

using Json = nlohmann::ordered_json;

class EventLog
{
  public:
    explicit EventLog(bool enabled = false)
        : m_enabled(enabled)
    {
    }

    bool Enabled() const
    {
        return m_enabled;
    }

    void Append(SimTime time, std::string_view kind, NodeId node, Json payload);

    const std::string& Text() const
    {
        return m_text;
    }

    std::uint64_t Records() const
    {
        return m_seq;
    }

    /// False if the file could not be written.
    bool WriteTo(const std::string& path) const;

  private:
    bool m_enabled;
    std::uint64_t m_seq = 0;
    std::string m_text;
};

} // namespace fep

#endif // FEP_EVENT_LOG_H
