#include <doctest.h>

TEST_SUITE_BEGIN("correspond");
TEST_SUITE_END();
