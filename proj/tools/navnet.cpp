#include "navnet/app/cli.hpp"

int main(int argc, char** argv) { return navnet::app::run_cli(argc, argv); }
