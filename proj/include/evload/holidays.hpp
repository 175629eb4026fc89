#pragma once

// Embedded public-holiday tables for the four dataset countries, generated
// from the fixed and movable rules for 2011-2025. A plain-text override file
// (lines of "YYYY-MM-DD,city") can replace the table per run.

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "evload/ingest.hpp"
#include "evload/time.hpp"

namespace evload {

constexpr int kHolidayYearMin = 2011;
constexpr int kHolidayYearMax = 2025;

// Anonymous Gregorian computus; returns {month, day} of Easter Sunday.
inline std::pair<int, int> easter_sunday(int year) {
    int a = year % 19;
    int b = year / 100, c = year % 100;
    int d = b / 4, e = b % 4;
    int f = (b + 8) / 25;
    int g = (b - f + 1) / 3;
    int h = (19 * a + b - d - g + 15) % 30;
    int i = c / 4, k = c % 4;
    int l = (32 + 2 * e + 2 * i - h - k) % 7;
    int m = (a + 11 * h + 22 * l) / 451;
    int month = (h + l - 7 * m + 114) / 31;
    int day = (h + l - 7 * m + 114) % 31 + 1;
    return {month, day};
}

class HolidayTable {
public:
    // Country keyed by dataset city; Custom carries no holidays unless an
    // override file is supplied.
    static const HolidayTable& embedded() {
        static const HolidayTable t = build();
        return t;
    }

    static HolidayTable from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open holiday table: " + path);
        HolidayTable t;
        t.year_min_ = kHolidayYearMin;
        t.year_max_ = kHolidayYearMax;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto comma = line.find(',');
            if (comma == std::string::npos)
                throw std::runtime_error("bad holiday line: " + line);
            int y, m, d;
            if (std::sscanf(line.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
                throw std::runtime_error("bad holiday date: " + line);
            City city = city_from_name(line.substr(comma + 1));
            t.days_.insert({city, y, m, d});
        }
        return t;
    }

    bool is_holiday(City city, int year, int month, int day) const {
        if (year < year_min_ || year > year_max_)
            throw std::runtime_error("date outside holiday table range: year " +
                                     std::to_string(year));
        return days_.count({city, year, month, day}) > 0;
    }

private:
    static HolidayTable build() {
        HolidayTable t;
        t.year_min_ = kHolidayYearMin;
        t.year_max_ = kHolidayYearMax;
        for (int y = kHolidayYearMin; y <= kHolidayYearMax; ++y) {
            auto [em, ed] = easter_sunday(y);
            std::int64_t easter = days_from_civil(y, em, ed);
            auto add_day = [&](City c, std::int64_t days) {
                int yy, mm, dd;
                civil_from_days(days, yy, mm, dd);
                t.days_.insert({c, yy, mm, dd});
            };
            auto add = [&](City c, int m, int d) { t.days_.insert({c, y, m, d}); };
            auto nth = [&](int m, int wd, int n) { return nth_weekday_of_month(y, m, wd, n); };
            auto last = [&](int m, int wd) { return last_weekday_of_month(y, m, wd); };

            // US federal (Palo Alto, Boulder).
            for (City c : {City::PaloAlto, City::Boulder}) {
                add(c, 1, 1);
                add(c, 1, nth(1, 0, 3));     // MLK: 3rd Monday Jan
                add(c, 2, nth(2, 0, 3));     // Washington: 3rd Monday Feb
                add(c, 5, last(5, 0));       // Memorial: last Monday May
                if (y >= 2021) add(c, 6, 19);  // Juneteenth
                add(c, 7, 4);
                add(c, 9, nth(9, 0, 1));     // Labor: 1st Monday Sep
                add(c, 10, nth(10, 0, 2));   // Columbus: 2nd Monday Oct
                add(c, 11, 11);              // Veterans
                add(c, 11, nth(11, 3, 4));   // Thanksgiving: 4th Thursday Nov
                add(c, 12, 25);
            }

            // England + Scotland bank holidays (Dundee).
            add(City::Dundee, 1, 1);
            add(City::Dundee, 1, 2);                     // Scotland
            add_day(City::Dundee, easter - 2);           // Good Friday
            add_day(City::Dundee, easter + 1);           // Easter Monday
            add(City::Dundee, 5, nth(5, 0, 1));          // Early May
            add(City::Dundee, 5, last(5, 0));            // Spring
            add(City::Dundee, 8, nth(8, 0, 1));          // Summer (Scotland)
            add(City::Dundee, 8, last(8, 0));            // Summer (England)
            add(City::Dundee, 11, 30);                   // St Andrew's Day
            add(City::Dundee, 12, 25);
            add(City::Dundee, 12, 26);

            // Western Australia (Perth).
            add(City::Perth, 1, 1);
            add(City::Perth, 1, 26);                     // Australia Day
            add(City::Perth, 3, nth(3, 0, 1));           // Labour Day
            add_day(City::Perth, easter - 2);            // Good Friday
            add_day(City::Perth, easter + 1);            // Easter Monday
            add(City::Perth, 4, 25);                     // Anzac Day
            add(City::Perth, 6, nth(6, 0, 1));           // WA Day
            add(City::Perth, 9, last(9, 0));             // King's Birthday (WA)
            add(City::Perth, 12, 25);
            add(City::Perth, 12, 26);
        }
        return t;
    }

    std::set<std::tuple<City, int, int, int>> days_;
    int year_min_ = kHolidayYearMin;
    int year_max_ = kHolidayYearMax;
};

}  // namespace evload
