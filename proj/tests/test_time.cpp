#include "doctest.h"
#include "evload/time.hpp"

using namespace evload;

TEST_CASE("civil round trip") {
    CivilDateTime c{2018, 6, 1, 12, 0, 0};
    Instant t = instant_from_civil(c);
    CivilDateTime back = civil_from_instant(t);
    CHECK(back.year == 2018);
    CHECK(back.month == 6);
    CHECK(back.day == 1);
    CHECK(back.hour == 12);
}

TEST_CASE("epoch weekday") {
    CHECK(weekday_of(days_from_civil(1970, 1, 1)) == 3);  // Thursday
    CHECK(weekday_of(days_from_civil(2018, 6, 6)) == 2);  // Wednesday
    CHECK(weekday_of(days_from_civil(2018, 6, 9)) == 5);  // Saturday
}

TEST_CASE("summer offset Denver") {
    // 2018-06-01 12:00 America/Denver -> 18:00Z
    Instant t = to_utc({2018, 6, 1, 12, 0, 0}, find_zone("America/Denver"));
    CHECK(format_rfc3339(t) == "2018-06-01T18:00:00Z");
}

TEST_CASE("winter offset Los Angeles") {
    Instant t = to_utc({2018, 1, 15, 12, 0, 0}, find_zone("America/Los_Angeles"));
    CHECK(format_rfc3339(t) == "2018-01-15T20:00:00Z");
}

TEST_CASE("fall-back fold resolves to earlier offset") {
    // 2018-11-04 01:30 America/Denver is ambiguous; earlier offset is -6.
    Instant t = to_utc({2018, 11, 4, 1, 30, 0}, find_zone("America/Denver"));
    CHECK(format_rfc3339(t) == "2018-11-04T07:30:00Z");
}

TEST_CASE("spring-forward gap shifts forward") {
    // 2018-03-11 02:30 America/Denver does not exist; shifted to 03:30 MDT.
    Instant t = to_utc({2018, 3, 11, 2, 30, 0}, find_zone("America/Denver"));
    CHECK(format_rfc3339(t) == "2018-03-11T09:30:00Z");
}

TEST_CASE("London BST") {
    Instant summer = to_utc({2018, 7, 1, 12, 0, 0}, find_zone("Europe/London"));
    CHECK(format_rfc3339(summer) == "2018-07-01T11:00:00Z");
    Instant winter = to_utc({2018, 1, 1, 12, 0, 0}, find_zone("Europe/London"));
    CHECK(format_rfc3339(winter) == "2018-01-01T12:00:00Z");
}

TEST_CASE("Perth fixed offset") {
    Instant t = to_utc({2018, 7, 1, 12, 0, 0}, find_zone("Australia/Perth"));
    CHECK(format_rfc3339(t) == "2018-07-01T04:00:00Z");
}

TEST_CASE("unknown zone throws") {
    CHECK_THROWS(find_zone("Mars/Olympus"));
}

TEST_CASE("rfc3339 round trip") {
    auto t = parse_rfc3339("2019-02-28T23:59:59Z");
    REQUIRE(t.has_value());
    CHECK(format_rfc3339(*t) == "2019-02-28T23:59:59Z");
}

TEST_CASE("timestamp format parsing") {
    auto c = parse_timestamp("06/01/2018 14:30", "%m/%d/%Y %H:%M");
    REQUIRE(c.has_value());
    CHECK(c->month == 6);
    CHECK(c->day == 1);
    CHECK(c->hour == 14);

    auto uk = parse_timestamp("28/02/2017 09:05", "%d/%m/%Y %H:%M");
    REQUIRE(uk.has_value());
    CHECK(uk->day == 28);
    CHECK(uk->month == 2);

    auto ampm = parse_timestamp("1/2/2018 1:05 PM", "%m/%d/%Y %I:%M %p");
    REQUIRE(ampm.has_value());
    CHECK(ampm->hour == 13);

    CHECK_FALSE(parse_timestamp("2018-13-01 00:00", "%Y-%m-%d %H:%M").has_value());
    CHECK_FALSE(parse_timestamp("not a date", "%Y-%m-%d %H:%M").has_value());
    CHECK_FALSE(parse_timestamp("2018-02-30 00:00", "%Y-%m-%d %H:%M").has_value());
}
