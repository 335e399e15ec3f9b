#include "fpbandits/harness.hpp"

int main(int argc, char** argv) { return fpbandits::cli_main(argc, argv); }
