#include <cstdio>

int main() {
  std::fprintf(stderr, "conecraft: commands not wired up yet\n");
  return 2;
}
