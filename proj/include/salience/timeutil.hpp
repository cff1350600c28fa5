#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace salience {

using UtcTime = std::chrono::sys_time<std::chrono::milliseconds>;
using CalendarDate = std::chrono::year_month_day;

/// Accepts "YYYY-MM-DDTHH:MM:SS[.fff...](Z|+HH:MM|-HH:MM)". Throws SchemaError.
UtcTime parse_rfc3339(std::string_view text);
/// Canonical form: seconds precision with "Z", plus ".mmm" when milliseconds are nonzero.
std::string format_rfc3339(UtcTime t);

/// "YYYY-MM-DD". Throws SchemaError.
CalendarDate parse_date(std::string_view text);
std::string format_date(CalendarDate d);

CalendarDate utc_date(UtcTime t);

}  // namespace salience
