#include <doctest.h>

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string("cd " INDUCTA_SOURCE_DIR " && " INDUCTA_BIN " ") + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

bool has(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("check: counterexample exits 1 and prints the attack") {
  const auto r = run("check builtin:ns-public --property nb-secrecy --max-events 5");
  CHECK(r.code == 1);
  CHECK(has(r.out, "COUNTEREXAMPLE"));
  CHECK(has(r.out, "2. Spy(as A) -> B : {Na#0, A}_pubK(B)"));
}

TEST_CASE("check: holding property exits 0") {
  const auto r = run("check builtin:ns-public-lowe --property nb-secrecy --max-events 4");
  CHECK(r.code == 0);
  CHECK(has(r.out, "holds at bound 4"));
}

TEST_CASE("check: truncated search exits 3") {
  const auto r = run("check builtin:otway-rees --property server-key --max-events 4 --max-states 20");
  CHECK(r.code == 3);
}

TEST_CASE("check: protocol files and inline properties") {
  CHECK(run("check protocols/ns-public.proto --property nb-secrecy --max-events 4").code == 1);
  const auto r = run("check builtin:ns-public --max-events 3 --property "
                     "'property secrecy \"na\": assume says A B {Na, A}_pubK(B); assume honest A B; secret Na'");
  CHECK(r.code == 0);
}

TEST_CASE("usage and parse errors exit 2") {
  CHECK(run("").code == 2);
  CHECK(run("check builtin:nope").code == 2);
  CHECK(run("check builtin:ns-public --property nope").code == 2);
  CHECK(run("check builtin:ns-public --format xml").code == 2);
  CHECK(run("check builtin:ns-public --bad S").code == 2);
  CHECK(run("replay missing.trace --protocol builtin:ns-public").code == 2);
  const auto r = run("check builtin:ns-public --property 'property secrecy \"x\": secret'");
  CHECK(r.code == 2);
  CHECK(has(r.out, "parse error"));
}

TEST_CASE("replay of the stored attacks") {
  CHECK(run("replay attacks/lowe.trace --protocol builtin:ns-public").code == 0);
  CHECK(run("replay attacks/lowe.trace --protocol builtin:ns-public-lowe").code == 1);
  CHECK(run("replay attacks/otway-ban.trace --protocol builtin:otway-rees-ban").code == 0);
  CHECK(run("replay attacks/otway-ban.trace --protocol builtin:otway-rees").code == 1);
}

TEST_CASE("run finds complete runs") {
  const auto r = run("run builtin:otway-rees");
  CHECK(r.code == 0);
  CHECK(has(r.out, "4. B -> A : {Na#0, {Na#0, K#0}_shrK(A)}"));
  CHECK(run("run builtin:ns-public --max-events 2").code == 1);
}

TEST_CASE("structured output") {
  const auto r = run("check builtin:ns-public --property nb-secrecy --max-events 4 --format structured");
  CHECK(r.code == 1);
  for (const char* key : {"protocol: ns-public\n", "property: nb-secrecy\n", "verdict: counterexample\n",
                          "bound: 4\n", "population: ", "traces-explored: ", "truncated: false\n",
                          "event: 1. A -> Spy : {Na#0, A}_pubK(Spy)\n", "end\n"})
    CHECK_MESSAGE(has(r.out, key), key);
  const auto h = run("check builtin:ns-public-lowe --property nb-secrecy --max-events 3 --format structured");
  CHECK(has(h.out, "verdict: holds\n"));
}

TEST_CASE("laws and list") {
  const auto r = run("laws --samples 50");
  CHECK(r.code == 0);
  CHECK(has(r.out, "0 failures"));
  const auto l = run("list");
  CHECK(l.code == 0);
  CHECK(has(l.out, "recursive"));
}
