#include <doctest.h>

TEST_SUITE_BEGIN("projcal");
TEST_SUITE_END();
