// Stand-alone completion server for trying `geezmt translate` without a
// real backend. Prints the endpoint, then serves until stdin closes.
//
//   geezmt_mock_backend --mode echo
//   geezmt_mock_backend --mode copy --references src.txt ref.txt

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "geezmt/corpus.hpp"
#include "geezmt/mock_backend.hpp"
#include "geezmt/unicode.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock completion backend"};
  std::string mode = "echo";
  std::vector<std::string> references;
  std::string fixed;
  app.add_option("--mode", mode, "echo | copy | fixed")
      ->check(CLI::IsMember({"echo", "copy", "fixed"}));
  app.add_option("--references", references, "Query file and reference file (copy mode)")
      ->expected(2);
  app.add_option("--text", fixed, "Answer for fixed mode");
  CLI11_PARSE(app, argc, argv);

  using Mode = geezmt::MockCompletionServer::Mode;
  const Mode m = mode == "copy" ? Mode::kCopyReference : (mode == "fixed" ? Mode::kFixed : Mode::kEchoLastExample);
  geezmt::MockCompletionServer server(m);
  if (m == Mode::kCopyReference) {
    if (references.size() != 2) {
      std::cerr << "copy mode needs --references <queries> <references>\n";
      return 2;
    }
    const auto queries = geezmt::split_lines(geezmt::read_file(references[0]));
    const auto refs = geezmt::split_lines(geezmt::read_file(references[1]));
    std::map<std::string, std::string> table;
    for (std::size_t i = 0; i < queries.size() && i < refs.size(); ++i) {
      table[geezmt::unicode::trim(geezmt::unicode::nfc(queries[i]))] = refs[i];
    }
    server.set_references(std::move(table));
  }
  server.set_fixed_text(fixed);
  server.start();
  std::cout << server.endpoint() << std::endl;
  std::string line;
  while (std::getline(std::cin, line)) {
  }
  server.stop();
  return 0;
}
