// Copyright 2026 The locbal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LOCBAL_IO_HPP_
#define LOCBAL_IO_HPP_

// Result files: a short header, the per-edge flow, and the transcript block.
//
//   locbal-result 1
//   algo <name>
//   arith <exact|float>
//   discrete <0|1>
//   completed <0|1>
//   flow <f_0> ... <f_{m-1}>       (edge order; positive = low id to high id)
//   locbal-transcript 1            (transcript block, see flow.hpp)
//   ...
//   end
//
// Exact numbers are written as integers or p/q in lowest terms; floats with
// 17 significant digits.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "locbal/common.hpp"
#include "locbal/flow.hpp"
#include "locbal/graph.hpp"

namespace locbal {

struct ResultHeader {
  std::string algo;
  std::string arith = "exact";
};

template <class Num>
void write_result(std::ostream& out, const LoadedGraph& g, const ResultHeader& header,
                  const BalancingResult<Num>& r) {
  out << "locbal-result 1\n";
  out << "algo " << header.algo << "\n";
  out << "arith " << header.arith << "\n";
  out << "discrete " << (r.discrete ? 1 : 0) << "\n";
  out << "completed " << (r.completed ? 1 : 0) << "\n";
  out << "flow";
  for (EdgeId e = 0; e < r.flow.size(); ++e) out << ' ' << format_number(r.flow.stored(e));
  out << "\n";
  write_transcript(out, g, r);
}

template <class Num>
BalancingResult<Num> read_result(std::istream& in, ResultHeader* header = nullptr) {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::kParseError, "result: " + why); };
  std::string line;
  if (!std::getline(in, line) || line != "locbal-result 1") fail("bad header");
  BalancingResult<Num> r;
  ResultHeader h;
  std::vector<Num> flow;
  for (;;) {
    if (!std::getline(in, line)) fail("missing transcript block");
    if (line == "locbal-transcript 1") break;
    std::istringstream s(line);
    std::string key, value;
    s >> key;
    if (key == "algo") {
      s >> h.algo;
    } else if (key == "arith") {
      s >> h.arith;
    } else if (key == "discrete" || key == "completed") {
      int bit = 0;
      if (!(s >> bit) || (bit != 0 && bit != 1)) fail("bad flag line");
      (key == "discrete" ? r.discrete : r.completed) = bit == 1;
    } else if (key == "flow") {
      while (s >> value) flow.push_back(parse_number<Num>(value));
    } else {
      fail("unexpected line '" + line + "'");
    }
  }
  std::stringstream block;
  block << line << '\n' << in.rdbuf();
  r.transcript = read_transcript<Num>(block, &r.rounds, &r.outputs);
  r.flow = Flow<Num>(flow.size());
  for (EdgeId e = 0; e < flow.size(); ++e) r.flow.send_on(e, true, flow[e]);
  if (header) *header = h;
  return r;
}

}  // namespace locbal

#endif  // LOCBAL_IO_HPP_
