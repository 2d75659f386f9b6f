#include <string>
#include <vector>

#include "pcax/cli.hpp"

int main(int argc, char** argv) {
    return pcax::run_command(std::vector<std::string>(argv + 1, argv + argc));
}
