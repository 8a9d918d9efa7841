#include <doctest.h>
#include "kernelsmith/types.hpp"
TEST_CASE("placeholder test_szego") { CHECK(true); }
