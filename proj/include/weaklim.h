/* C API for the weaklim shared library: opaque handles, integer status
 * codes, and string results released through wl_string_free. Status codes
 * match the CLI exit codes: 0 ok, 2 invalid argument or config, 3 numerical
 * failure, 4 i/o failure. */
#ifndef WEAKLIM_H
#define WEAKLIM_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct wl_context wl_context;
typedef struct wl_mesh wl_mesh;
typedef struct wl_map wl_map;

typedef enum {
    WL_OK = 0,
    WL_ERR_INVALID = 2,
    WL_ERR_NUMERICAL = 3,
    WL_ERR_IO = 4
} wl_status;

const char* wl_version(void);

wl_context* wl_context_create(void);
void wl_context_destroy(wl_context* ctx);
/* message of the last failing call on this context ("" if none) */
const char* wl_last_error(const wl_context* ctx);
void wl_set_threads(wl_context* ctx, int threads);

/* Runs one experiment configuration (JSON text); outputs and a manifest are
 * written atomically under out_dir, and the manifest JSON is returned in
 * *manifest_json (caller frees with wl_string_free; pass NULL to skip). */
wl_status wl_run(wl_context* ctx, const char* config_json, const char* out_dir, char** manifest_json);

void wl_string_free(char* s);

/* meshes */
wl_status wl_mesh_build_box(wl_context* ctx, int n, int resolution, wl_mesh** out);
wl_status wl_mesh_build_sphere(wl_context* ctx, int n, const double* center, double radius, int refinement,
                               wl_mesh** out);
wl_status wl_mesh_load(wl_context* ctx, const char* path, wl_mesh** out);
wl_status wl_mesh_save(wl_context* ctx, const wl_mesh* mesh, const char* path);
int wl_mesh_dim(const wl_mesh* mesh);
int wl_mesh_vertex_count(const wl_mesh* mesh);
int wl_mesh_simplex_count(const wl_mesh* mesh);
int wl_mesh_facet_count(const wl_mesh* mesh);
void wl_mesh_destroy(wl_mesh* mesh);

/* piecewise-affine maps over a mesh */
wl_status wl_map_identity(wl_context* ctx, const wl_mesh* mesh, wl_map** out);
/* nodal_values: vertex_count * n doubles, row-major per vertex */
wl_status wl_map_create(wl_context* ctx, const wl_mesh* mesh, const double* nodal_values, wl_map** out);
wl_status wl_map_load_values(wl_context* ctx, const wl_mesh* mesh, const char* path, wl_map** out);
wl_status wl_map_save_values(wl_context* ctx, const wl_map* map, const char* path);
wl_status wl_map_evaluate(wl_context* ctx, const wl_map* map, const double* x, double* y_out);
void wl_map_destroy(wl_map* map);

/* degree and integrals */
wl_status wl_degree(wl_context* ctx, const wl_map* boundary_map, const double* y, unsigned long long seed,
                    int* degree_out);
wl_status wl_winding_2d(wl_context* ctx, const wl_map* boundary_map, const double* y, int* degree_out);
wl_status wl_integrate_jacobian(wl_context* ctx, const wl_map* map, double* out);
/* model: "f_model" or "g_model"; returns the energy report as JSON */
wl_status wl_energy_json(wl_context* ctx, const wl_map* map, const char* model, char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* WEAKLIM_H */
