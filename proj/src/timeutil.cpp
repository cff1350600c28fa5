#include "salience/timeutil.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>

#include "salience/errors.hpp"

namespace salience {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) throw SchemaError(fmt::format("truncated timestamp '{}'", whole));
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i])))
            throw SchemaError(fmt::format("bad digit in '{}'", whole));
        value = value * 10 + (text[i] - '0');
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, char c, std::string_view whole) {
    if (pos >= text.size() || text[pos] != c)
        throw SchemaError(fmt::format("expected '{}' at offset {} in '{}'", c, pos, whole));
}

CalendarDate checked_date(int y, int m, int d, std::string_view whole) {
    CalendarDate date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                      std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) throw SchemaError(fmt::format("invalid calendar date in '{}'", whole));
    return date;
}

}  // namespace

CalendarDate parse_date(std::string_view text) {
    if (text.size() != 10) throw SchemaError(fmt::format("expected YYYY-MM-DD, got '{}'", text));
    const int y = parse_fixed(text, 0, 4, text);
    expect_char(text, 4, '-', text);
    const int m = parse_fixed(text, 5, 2, text);
    expect_char(text, 7, '-', text);
    const int d = parse_fixed(text, 8, 2, text);
    return checked_date(y, m, d, text);
}

std::string format_date(CalendarDate d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()),
                       static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
}

UtcTime parse_rfc3339(std::string_view text) {
    using namespace std::chrono;
    if (text.size() < 20) throw SchemaError(fmt::format("timestamp too short: '{}'", text));
    const CalendarDate date = parse_date(text.substr(0, 10));
    if (text[10] != 'T' && text[10] != 't' && text[10] != ' ')
        throw SchemaError(fmt::format("expected 'T' in '{}'", text));
    const int hh = parse_fixed(text, 11, 2, text);
    expect_char(text, 13, ':', text);
    const int mm = parse_fixed(text, 14, 2, text);
    expect_char(text, 16, ':', text);
    const int ss = parse_fixed(text, 17, 2, text);
    if (hh > 23 || mm > 59 || ss > 60) throw SchemaError(fmt::format("time out of range: '{}'", text));

    std::size_t pos = 19;
    int millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            if (digits < 3) millis = millis * 10 + (text[pos] - '0');
            ++digits;
            ++pos;
        }
        if (digits == 0) throw SchemaError(fmt::format("empty fraction in '{}'", text));
        for (int i = digits; i < 3; ++i) millis *= 10;
    }
    if (pos >= text.size()) throw SchemaError(fmt::format("missing UTC offset in '{}'", text));

    int offset_minutes = 0;
    if (text[pos] == 'Z' || text[pos] == 'z') {
        ++pos;
    } else if (text[pos] == '+' || text[pos] == '-') {
        const int sign = text[pos] == '+' ? 1 : -1;
        const int oh = parse_fixed(text, pos + 1, 2, text);
        expect_char(text, pos + 3, ':', text);
        const int om = parse_fixed(text, pos + 4, 2, text);
        offset_minutes = sign * (oh * 60 + om);
        pos += 6;
    } else {
        throw SchemaError(fmt::format("bad UTC offset in '{}'", text));
    }
    if (pos != text.size()) throw SchemaError(fmt::format("trailing characters in '{}'", text));

    return UtcTime{sys_days{date}} + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{millis} -
           minutes{offset_minutes};
}

std::string format_rfc3339(UtcTime t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const CalendarDate date{day};
    const hh_mm_ss<milliseconds> tod{t - day};
    std::string out = fmt::format("{}T{:02d}:{:02d}:{:02d}", format_date(date), tod.hours().count(),
                                  tod.minutes().count(), tod.seconds().count());
    if (tod.subseconds().count() != 0) out += fmt::format(".{:03d}", tod.subseconds().count());
    out += 'Z';
    return out;
}

CalendarDate utc_date(UtcTime t) {
    return CalendarDate{std::chrono::floor<std::chrono::days>(t)};
}

}  // namespace salience
