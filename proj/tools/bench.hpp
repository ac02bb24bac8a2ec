#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ellfem/mesh.hpp"

namespace ellfem::cli {

enum class Backend { Naive, Batched, P1Fast };

std::string to_string(Backend backend);
Backend parse_backend(const std::string& name);

struct BenchRecord {
  Backend backend = Backend::Batched;
  MeshKind kind = MeshKind::Surface;
  int dim = 0;
  int order = 0;
  Index elements = 0;
  Index dofs = 0;
  Index batch_size = 0;
  int repeats = 0;
  double t_median_s = 0.0;
  double t_min_s = 0.0;
  double t_max_s = 0.0;
};

/// Assembles mass and stiffness (triplets and finalize) once for warm-up and then
/// `repeats` times, timing each run on the monotonic clock.
BenchRecord bench_assembly(const Mesh& mesh, Backend backend, int repeats, Index batch_size);

/// backend,kind,dim,order,elements,dofs,batch_size,repeats,t_median_s,t_min_s,t_max_s
void write_bench_header(std::ostream& out);
void write_bench_row(const BenchRecord& r, std::ostream& out);

}  // namespace ellfem::cli
