#include "xi_index/harness/cli.hpp"

#include <fstream>
#include <ostream>

#include "xi_index/errors.hpp"
#include "xi_index/harness/config.hpp"
#include "xi_index/harness/report_json.hpp"
#include "xi_index/harness/runner.hpp"

namespace xidx::harness {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = parse_config(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const ConfigError& e) {
    err << "xi_index: " << e.what() << '\n';
    return 2;
  }

  RunResult result;
  try {
    result = run(cfg);
  } catch (const ConfigError& e) {
    err << "xi_index: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "xi_index: internal error: " << e.what() << '\n';
    return 1;
  }

  if (!cfg.out.empty()) {
    std::ofstream file(cfg.out);
    if (!file) {
      err << "xi_index: cannot write '" << cfg.out << "'\n";
      return 2;
    }
    for (const auto& rec : result.records) write_ndjson(file, rec);
  }
  out << summary_line(cfg, result.summary) << '\n';
  return result.exit_code();
}

}  // namespace xidx::harness
