#include "msg/driver.hpp"
#include "msg/bench.hpp"
#include "msg/io.hpp"

#include <catch2/catch_amalgamated.hpp>

TEST_CASE("placeholder bench") { CHECK(true); }
