#include "hele_shaw/cli.hpp"

int main(int argc, char** argv) { return hele_shaw::run_main(argc, argv); }
