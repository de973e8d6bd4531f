#pragma once

#include "rpcsde/models.hpp"
#include "rpcsde/mrpc.hpp"
#include "rpcsde/pce.hpp"
#include "rpcsde/run_record.hpp"

namespace rpcsde {

// State of the basis/tensor evolution: orthonormal polynomials as a triangular
// change of basis against the monomials, plus the triple products over the
// restricted index set.  Both are rotated by the Cholesky factor each step.
struct PrpcState {
    long step = 0;
    OrthonormalBasis basis;
    TripleTensor tensor;
    MrpcDiagnostics diag;  // spectrum of the evolved inner-product matrix

    PrpcState(int dimension, int L, int S)
        : basis(dimension, L), tensor(dimension, L, S, 2 * L + S) {}
};

// pRPC always runs in sparse mode and needs the drift and diffusion-covariance
// polynomials representable in the degree-L basis: deg <= min(S, L).
PrpcState prpc_init(const ModelSpec& model, const MrpcConfig& cfg);

PrpcState prpc_step(const PrpcState& state, const ModelSpec& model, const MrpcConfig& cfg);

// Moments extracted from the current basis/tensor: order <= L from the
// triangular expansion, higher orders through the projection recursion.
MomentTable prpc_moments(const PrpcState& state, int max_order);

RunResult prpc_run(const ModelSpec& model, const MrpcConfig& cfg);

}  // namespace rpcsde
