#include "bench.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "ellfem/assembly.hpp"
#include "ellfem/errors.hpp"

namespace ellfem::cli {

std::string to_string(Backend backend) {
  switch (backend) {
    case Backend::Naive: return "naive";
    case Backend::Batched: return "batched";
    case Backend::P1Fast: return "p1fast";
  }
  return "?";
}

Backend parse_backend(const std::string& name) {
  if (name == "naive") return Backend::Naive;
  if (name == "batched") return Backend::Batched;
  if (name == "p1fast") return Backend::P1Fast;
  throw DomainError("unknown backend '" + name + "'");
}

BenchRecord bench_assembly(const Mesh& mesh, Backend backend, int repeats, Index batch_size) {
  if (repeats < 3) throw DomainError("at least 3 repeats are required");
  if (backend == Backend::P1Fast && mesh.order != 1)
    throw PreconditionError("p1fast needs a P1 mesh");
  auto run = [&] {
    AssemblyOutput out;
    switch (backend) {
      case Backend::Naive: out = assemble_naive(mesh); break;
      case Backend::Batched: out = assemble_batched(mesh, {.batch_size = batch_size}); break;
      case Backend::P1Fast: out = assemble_p1_fast(mesh); break;
    }
    const auto matrices = out.matrices();
    return matrices.first.nnz() + matrices.second.nnz();
  };

  run();
  std::vector<double> times;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    run();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());

  BenchRecord rec;
  rec.backend = backend;
  rec.kind = mesh.kind;
  rec.dim = mesh.dim;
  rec.order = mesh.order;
  rec.elements = mesh.num_elements();
  rec.dofs = mesh.num_nodes();
  rec.batch_size = backend == Backend::Batched ? batch_size : 1;
  rec.repeats = repeats;
  const std::size_t n = times.size();
  rec.t_median_s = n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
  rec.t_min_s = times.front();
  rec.t_max_s = times.back();
  return rec;
}

void write_bench_header(std::ostream& out) {
  out << "backend,kind,dim,order,elements,dofs,batch_size,repeats,t_median_s,t_min_s,t_max_s\n";
}

void write_bench_row(const BenchRecord& r, std::ostream& out) {
  out << to_string(r.backend) << ',' << to_string(r.kind) << ',' << r.dim << ',' << r.order << ','
      << r.elements << ',' << r.dofs << ',' << r.batch_size << ',' << r.repeats << ','
      << r.t_median_s << ',' << r.t_min_s << ',' << r.t_max_s << '\n';
}

}  // namespace ellfem::cli
