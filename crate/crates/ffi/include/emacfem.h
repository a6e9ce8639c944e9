#ifndef EMACFEM_H
#define EMACFEM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum {
  EMAC_STATUS_OK = 0,
  EMAC_STATUS_NULL_POINTER = 1,
  EMAC_STATUS_INVALID_ARGUMENT = 2,
  EMAC_STATUS_CONFIG = 3,
  EMAC_STATUS_IO = 4,
  EMAC_STATUS_MESH_FORMAT = 5,
  EMAC_STATUS_MESH_VALIDATION = 6,
  EMAC_STATUS_SINGULAR_MATRIX = 7,
  EMAC_STATUS_NON_CONVERGENCE = 8,
  EMAC_STATUS_INVALID_STATE = 9,
  // The buffer passed in is too small; the required length was written.
  EMAC_STATUS_BUFFER_TOO_SMALL = 10,
  EMAC_STATUS_FINISHED = 11,
  EMAC_STATUS_PANIC = 12,
  EMAC_STATUS_INVALID_REGION = 13,
} EmacStatus;

// Opaque mesh handle.
typedef struct EmacMesh EmacMesh;

// Opaque time-stepping session.
typedef struct EmacSimulation EmacSimulation;

// Diagnostics of one time step. Lagrangian entries are NaN when the
// Lagrangian diagnostics are disabled.
typedef struct {
  size_t step;
  double time;
  size_t order;
  size_t newton_iterations;
  double newton_residual;
  double e_e_mom[2];
  double e_e_am;
  double e_l_mom[2];
  double e_l_am;
  double e_trad_mom[2];
  double e_trad_am;
  double energy;
  double momentum[2];
  double angular_momentum;
} EmacStepReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next call into this library on the same thread.
const char *emac_last_error(void);

// Library version as a static NUL-terminated string.
const char *emac_version(void);

// Loads a Gmsh 2.2 ASCII (`.msh`) or native dump mesh.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
EmacStatus emac_mesh_load(const char *path, EmacMesh **out);

// Builds an `n` by `n` structured mesh of a rectangle.
//
// # Safety
// `out` must be a valid pointer.
EmacStatus emac_mesh_structured(size_t n,
                                double x0,
                                double x1,
                                double y0,
                                double y1,
                                bool periodic_x,
                                EmacMesh **out);

// Vertex, triangle and edge counts. Any output pointer may be null.
//
// # Safety
// `mesh` must come from this library; non-null outputs must be valid.
EmacStatus emac_mesh_counts(const EmacMesh *mesh,
                            size_t *vertices,
                            size_t *triangles,
                            size_t *edges);

// Copies vertex coordinates as interleaved x, y pairs. `len` is the buffer
// length in doubles; on `BufferTooSmall` it receives the required length.
//
// # Safety
// `buf` must hold `*len` doubles.
EmacStatus emac_mesh_vertices(const EmacMesh *mesh, double *buf, size_t *len);

// Releases a mesh. Null is ignored.
//
// # Safety
// `mesh` must come from this library and not be used afterwards.
void emac_mesh_free(EmacMesh *mesh);

// Creates a session from JSON configuration text. A relative `mesh_path` is
// resolved against the working directory.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
EmacStatus emac_simulation_from_json(const char *json, EmacSimulation **out);

// Creates a session from a JSON configuration file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
EmacStatus emac_simulation_from_file(const char *path, EmacSimulation **out);

// Advances one time step. Returns `Finished` without stepping once the
// configured end time is reached.
//
// # Safety
// `sim` must come from this library; `report` may be null.
EmacStatus emac_simulation_step(EmacSimulation *sim, EmacStepReport *report);

// Steps taken so far and the total number of steps. Either output may be
// null.
//
// # Safety
// `sim` must come from this library.
EmacStatus emac_simulation_progress(const EmacSimulation *sim, size_t *taken, size_t *total);

// Time of the newest state.
//
// # Safety
// `sim` and `time` must be valid.
EmacStatus emac_simulation_time(const EmacSimulation *sim, double *time);

// Number of mesh vertices of the session's mesh.
//
// # Safety
// `sim` and `n` must be valid.
EmacStatus emac_simulation_vertex_count(const EmacSimulation *sim, size_t *n);

// Velocity at the mesh vertices as interleaved x, y pairs. Buffer handling
// follows [`emac_mesh_vertices`].
//
// # Safety
// `buf` must hold `*len` doubles.
EmacStatus emac_simulation_vertex_velocity(const EmacSimulation *sim, double *buf, size_t *len);

// Physical pressure at the mesh vertices.
//
// # Safety
// `buf` must hold `*len` doubles.
EmacStatus emac_simulation_vertex_pressure(const EmacSimulation *sim, double *buf, size_t *len);

// Releases a session. Null is ignored.
//
// # Safety
// `sim` must come from this library and not be used afterwards.
void emac_simulation_free(EmacSimulation *sim);

// Runs a configuration file to completion and writes the usual output
// directory. `steps` may be null.
//
// # Safety
// `path` must be a NUL-terminated string.
EmacStatus emac_run_file(const char *path, size_t *steps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMACFEM_H */
