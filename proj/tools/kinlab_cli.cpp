/// @file kinlab_cli.cpp
/// @brief Experiment driver CLI (subcommands filled in as modules land).

#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::puts("kinlab: experiment subcommands not wired up yet");
  return 1;
}
