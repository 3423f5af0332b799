#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "subpress/cli.hpp"

int main(int argc, char** argv) {
  subpress::JobSpec job;
  std::string mode = "exact";
  CLI::App app{"Cover-relative pressure, entropy and variational checks for Z^d shift spaces"};
  app.add_option("--system", job.system, "JSON system description")->required();
  app.add_option("--command", job.command, "pressure | entropy | vp | check-potential | ow | equilibrium")->required();
  app.add_option("--n-max", job.n_max, "largest box side")->capture_default_str();
  app.add_option("--seed", job.seed, "random seed")->capture_default_str();
  app.add_option("--mode", mode, "exact | greedy")->check(CLI::IsMember({"exact", "greedy"}))->capture_default_str();
  app.add_option("--out", job.out, "output directory")->capture_default_str();
  app.add_option("--tolerance", job.tolerance, "violation and squeeze tolerance")->capture_default_str();
  app.add_option("--samples", job.samples, "samples for check-potential")->capture_default_str();
  app.add_option("--restarts", job.restarts, "restarts for vp")->capture_default_str();
  app.add_option("--n-entropy", job.n_entropy, "box side for the entropy bound in vp")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  job.mode = mode == "greedy" ? subpress::Mode::greedy : subpress::Mode::exact;
  return subpress::run(job);
}
