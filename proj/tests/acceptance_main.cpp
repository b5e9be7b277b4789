#include "thzmap/pipeline.hpp"
#include <cstdio>
int main() { std::printf("placeholder\n"); return 0; }
