#include "sparse_anova/cli.hpp"

int main(int argc, char** argv)
{
  return sparse_anova::cli::run(argc, argv);
}
