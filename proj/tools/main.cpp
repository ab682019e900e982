#include "camtraj/cli.hpp"

int main(int argc, char** argv) { return camtraj::run_cli(argc, argv); }
