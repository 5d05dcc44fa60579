#pragma once

#include <string>
#include <vector>

namespace fixtures {

struct IntegralPair {
  const char* family;
  const char* function;
  const char* primitive;
};

// Function / primitive pairs from the dataset examples table.
inline const std::vector<IntegralPair>& integral_pairs() {
  static const std::vector<IntegralPair> pairs = {
      {"fwd", "acos(x)", "x*acos(x) - sqrt(1 - x^2)"},
      {"fwd", "x*(2*x + cos(2*x))", "2*x^3/3 + x*sin(2*x)/2 + cos(2*x)/4"},
      {"fwd", "x*(x + 4)/(x + 2)", "x^2/2 + 2*x - 4*log(x + 2)"},
      {"fwd", "cos(2*x)/sin(x)", "log(cos(x) - 1)/2 - log(cos(x) + 1)/2 + 2*cos(x)"},
      {"fwd", "3*x^2*asinh(2*x)", "x^3*asinh(2*x) - x^2*sqrt(4*x^2 + 1)/6 + sqrt(4*x^2 + 1)/12"},
      {"fwd", "x^3*log(x^2)^4",
       "x^4*log(x^2)^4/4 - x^4*log(x^2)^3/2 + 3*x^4*log(x^2)^2/4 - 3*x^4*log(x^2)/4 + 3*x^4/8"},
      {"bwd", "cos(x) + tan(x)^2 + 2", "x + sin(x) + tan(x)"},
      {"bwd", "1/(x^2*sqrt(x - 1)*sqrt(x + 1))", "sqrt(x - 1)*sqrt(x + 1)/x"},
      {"bwd", "(2*x/cos(x)^2 + tan(x))*tan(x)", "x*tan(x)^2"},
      {"bwd", "(x*tan(exp(x)/x) + (x - 1)*exp(x)/cos(exp(x)/x)^2)/x", "x*tan(exp(x)/x)"},
      {"bwd", "1 + 1/log(log(x)) - 1/(log(x)*log(log(x))^2)", "x + x/log(log(x))"},
      {"bwd", "-2*x^2*sin(x^2)*tan(x) + x*(tan(x)^2 + 1)*cos(x^2) + cos(x^2)*tan(x)", "x*cos(x^2)*tan(x)"},
      {"ibp", "x*(x + log(x))", "x^2*(4*x + 6*log(x) - 3)/12"},
      {"ibp", "x/(x + 3)^2", "(-x + (x + 3)*log(x + 3))/(x + 3)"},
      {"ibp", "(x + sqrt(2))/cos(x)^2", "(x + sqrt(2))*tan(x) + log(cos(x))"},
      {"ibp", "x*(2*x + 5)*(3*x + 2*log(x) + 1)", "x^2*(27*x^2 + 24*x*log(x) + 94*x + 90*log(x))/18"},
      {"ibp", "(x - 2*x/sin(x)^2 + 1/tan(x))*log(x)/sin(x)", "(x*log(x) + tan(x))/(sin(x)*tan(x))"},
      {"ibp", "x^3*sinh(x)", "x^3*cosh(x) - 3*x^2*sinh(x) + 6*x*cosh(x) - 6*sinh(x)"},
  };
  return pairs;
}

inline const char* table_equation() { return "162*x*log(x)*y' + 2*y^3*log(x)^2 - 81*y*log(x) + 81*y"; }

// Ten beam hypotheses for table_equation(), all valid up to renaming c.
inline const std::vector<std::string>& table_hypotheses() {
  static const std::vector<std::string> hyps = {
      "9*sqrt(x)*sqrt(1/log(x))/sqrt(c + 2*x)",
      "9*sqrt(x)/(sqrt(c + 2*x)*sqrt(log(x)))",
      "9*sqrt(2)*sqrt(x)*sqrt(1/log(x))/(2*sqrt(c + x))",
      "9*sqrt(x)*sqrt(1/(c*log(x) + 2*x*log(x)))",
      "9*sqrt(2)*sqrt(x)/(2*sqrt(c + x)*sqrt(log(x)))",
      "9/sqrt(c*log(x)/x + 2*log(x))",
      "9*sqrt(x)/sqrt(c*log(x) + 2*x*log(x))",
      "9/(sqrt(c/x + 2)*sqrt(log(x)))",
      "9*sqrt(1/(c*log(x)/x + 2*log(x)))",
      "9*sqrt(x)*sqrt(1/(c*log(x) + 2*x*log(x) + log(x)))",
  };
  return hyps;
}

}  // namespace fixtures
