#pragma once

#include <functional>
#include <vector>

namespace hz {

double normal_cdf(double x);

// sup |F_n - F| for a continuous reference cdf.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Upper tail of the chi-square distribution.
double chi2_pvalue(double statistic, double dof);

struct Moments {
  double mean = 0;
  double variance = 0;
  double stderr_ = 0;
  long n = 0;
};
Moments moments(const std::vector<double>& x);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hz
