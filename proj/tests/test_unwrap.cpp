#include <doctest.h>

TEST_SUITE_BEGIN("unwrap");
TEST_SUITE_END();
