#include <doctest.h>
#include "kernelsmith/types.hpp"
TEST_CASE("placeholder test_identities") { CHECK(true); }
