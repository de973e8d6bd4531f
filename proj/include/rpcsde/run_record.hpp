#pragma once

#include <string>
#include <vector>

namespace rpcsde {

// One recorded time slice of a stepper run.
struct StepRecord {
    double t = 0.0;
    std::vector<double> moments;  // addressed by GradedBasis(d, J)
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double ortho_residual = 0.0;
};

// Full run output.  status 0 = completed, 3 = numerical failure with partial
// records retained (error holds the message, failure_step the step index).
struct RunResult {
    int dimension = 0;
    int moment_order = 0;
    std::vector<StepRecord> records;
    int status = 0;
    std::string error;
    long failure_step = -1;
};

}  // namespace rpcsde
