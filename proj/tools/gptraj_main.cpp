#include "cli/experiment.hpp"

int main(int argc, char** argv) {
  return gptraj::cli::experiment_main(argc, argv);
}
