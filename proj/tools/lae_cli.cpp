#include "lae/harness.hpp"

int main(int argc, char** argv) { return lae::harness::run_cli(argc, argv); }
