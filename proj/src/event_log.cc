#include "fep/event_log.h"

#include <fstream>

namespace fep
{

void
EventLog::Append(SimTime time, std::string_view kind, NodeId node, Json payload)
{
    if (!m_enabled)
    {
        return;
    }
    Json record;
    record["time"] = time;
    record["seq"] = m_seq++;
    record["kind"] = kind;
    record["node"] = node;
    record["payload"] = std::move(payload);
    m_text += record.dump();
    m_text += '\n';
}

bool
EventLog::WriteTo(const std::string& path) const
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        return false;
    }
    out << m_text;
    return static_cast<bool>(out);
}

} // namespace fep
