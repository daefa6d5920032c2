#include "weaklim.h"

#include <cstring>
#include <memory>
#include <string>

#include "weaklim/convex.hpp"
#include "weaklim/degree.hpp"
#include "weaklim/energy.hpp"
#include "weaklim/experiments.hpp"
#include "weaklim/mesh.hpp"
#include "weaklim/parallel.hpp"
#include "weaklim/pl_map.hpp"
#include "weaklim/version.hpp"

struct wl_context {
    std::string last_error;
};

struct wl_mesh {
    std::shared_ptr<const weaklim::SimplicialMesh> mesh;
};

struct wl_map {
    std::unique_ptr<weaklim::PiecewiseAffineMap> map;
};

namespace {

wl_status to_status(const weaklim::Error& e) { return static_cast<wl_status>(static_cast<int>(e.code())); }

template <typename Fn>
wl_status guarded(wl_context* ctx, Fn&& fn) {
    if (!ctx) return WL_ERR_INVALID;
    try {
        fn();
        ctx->last_error.clear();
        return WL_OK;
    } catch (const weaklim::Error& e) {
        ctx->last_error = e.what();
        return to_status(e);
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return WL_ERR_NUMERICAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

extern "C" {

const char* wl_version(void) { return weaklim::kVersion; }

wl_context* wl_context_create(void) { return new wl_context(); }

void wl_context_destroy(wl_context* ctx) { delete ctx; }

const char* wl_last_error(const wl_context* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

void wl_set_threads(wl_context* ctx, int threads) {
    (void)ctx;
    weaklim::set_thread_count(threads);
}

wl_status wl_run(wl_context* ctx, const char* config_json, const char* out_dir, char** manifest_json) {
    return guarded(ctx, [&] {
        if (!config_json || !out_dir) weaklim::fail_invalid("wl_run: null argument");
        std::string manifest = weaklim::run_experiment(config_json, out_dir);
        if (manifest_json) *manifest_json = dup_string(manifest);
    });
}

void wl_string_free(char* s) { std::free(s); }

wl_status wl_mesh_build_box(wl_context* ctx, int n, int resolution, wl_mesh** out) {
    return guarded(ctx, [&] {
        if (!out) weaklim::fail_invalid("null output handle");
        auto mesh = std::make_shared<weaklim::SimplicialMesh>(weaklim::build_box_mesh(n, resolution));
        *out = new wl_mesh{std::move(mesh)};
    });
}

wl_status wl_mesh_build_sphere(wl_context* ctx, int n, const double* center, double radius, int refinement,
                               wl_mesh** out) {
    return guarded(ctx, [&] {
        if (!out || !center) weaklim::fail_invalid("null argument");
        weaklim::Vec c(n, center);
        auto mesh = std::make_shared<weaklim::SimplicialMesh>(weaklim::build_sphere_mesh(n, c, radius, refinement));
        *out = new wl_mesh{std::move(mesh)};
    });
}

wl_status wl_mesh_load(wl_context* ctx, const char* path, wl_mesh** out) {
    return guarded(ctx, [&] {
        if (!out || !path) weaklim::fail_invalid("null argument");
        auto mesh = std::make_shared<weaklim::SimplicialMesh>(weaklim::load_mesh(path));
        *out = new wl_mesh{std::move(mesh)};
    });
}

wl_status wl_mesh_save(wl_context* ctx, const wl_mesh* mesh, const char* path) {
    return guarded(ctx, [&] {
        if (!mesh || !path) weaklim::fail_invalid("null argument");
        weaklim::save_mesh(*mesh->mesh, path);
    });
}

int wl_mesh_dim(const wl_mesh* mesh) { return mesh ? mesh->mesh->dim : 0; }
int wl_mesh_vertex_count(const wl_mesh* mesh) { return mesh ? mesh->mesh->vertex_count() : 0; }
int wl_mesh_simplex_count(const wl_mesh* mesh) { return mesh ? mesh->mesh->simplex_count() : 0; }
int wl_mesh_facet_count(const wl_mesh* mesh) { return mesh ? mesh->mesh->facet_count() : 0; }

void wl_mesh_destroy(wl_mesh* mesh) { delete mesh; }

wl_status wl_map_identity(wl_context* ctx, const wl_mesh* mesh, wl_map** out) {
    return guarded(ctx, [&] {
        if (!mesh || !out) weaklim::fail_invalid("null argument");
        *out = new wl_map{std::make_unique<weaklim::PiecewiseAffineMap>(
            weaklim::PiecewiseAffineMap::identity(mesh->mesh))};
    });
}

wl_status wl_map_create(wl_context* ctx, const wl_mesh* mesh, const double* nodal_values, wl_map** out) {
    return guarded(ctx, [&] {
        if (!mesh || !nodal_values || !out) weaklim::fail_invalid("null argument");
        const int n = mesh->mesh->dim;
        std::vector<weaklim::Vec> vals(mesh->mesh->vertex_count(), weaklim::Vec(n));
        for (int v = 0; v < mesh->mesh->vertex_count(); ++v)
            for (int d = 0; d < n; ++d) vals[v][d] = nodal_values[v * n + d];
        *out = new wl_map{
            std::make_unique<weaklim::PiecewiseAffineMap>(mesh->mesh, std::move(vals), "capi")};
    });
}

wl_status wl_map_load_values(wl_context* ctx, const wl_mesh* mesh, const char* path, wl_map** out) {
    return guarded(ctx, [&] {
        if (!mesh || !path || !out) weaklim::fail_invalid("null argument");
        *out = new wl_map{
            std::make_unique<weaklim::PiecewiseAffineMap>(weaklim::load_map_values(mesh->mesh, path))};
    });
}

wl_status wl_map_save_values(wl_context* ctx, const wl_map* map, const char* path) {
    return guarded(ctx, [&] {
        if (!map || !path) weaklim::fail_invalid("null argument");
        weaklim::save_map_values(*map->map, path);
    });
}

wl_status wl_map_evaluate(wl_context* ctx, const wl_map* map, const double* x, double* y_out) {
    return guarded(ctx, [&] {
        if (!map || !x || !y_out) weaklim::fail_invalid("null argument");
        weaklim::Vec p(map->map->dim(), x);
        weaklim::Vec y = map->map->evaluate(p);
        for (int d = 0; d < y.n; ++d) y_out[d] = y[d];
    });
}

void wl_map_destroy(wl_map* map) { delete map; }

wl_status wl_degree(wl_context* ctx, const wl_map* boundary_map, const double* y, unsigned long long seed,
                    int* degree_out) {
    return guarded(ctx, [&] {
        if (!boundary_map || !y || !degree_out) weaklim::fail_invalid("null argument");
        weaklim::Vec p(boundary_map->map->dim(), y);
        *degree_out = weaklim::degree_pl(*boundary_map->map, p, seed);
    });
}

wl_status wl_winding_2d(wl_context* ctx, const wl_map* boundary_map, const double* y, int* degree_out) {
    return guarded(ctx, [&] {
        if (!boundary_map || !y || !degree_out) weaklim::fail_invalid("null argument");
        weaklim::Vec p(2, y);
        *degree_out = weaklim::winding_oracle_2d(*boundary_map->map, p);
    });
}

wl_status wl_integrate_jacobian(wl_context* ctx, const wl_map* map, double* out) {
    return guarded(ctx, [&] {
        if (!map || !out) weaklim::fail_invalid("null argument");
        *out = map->map->integrate_jacobian();
    });
}

wl_status wl_energy_json(wl_context* ctx, const wl_map* map, const char* model, char** json_out) {
    return guarded(ctx, [&] {
        if (!map || !model || !json_out) weaklim::fail_invalid("null argument");
        std::string name(model);
        weaklim::EnergyReport rep;
        if (name == "g_model") {
            rep = weaklim::energy_G(*map->map, weaklim::make_builtin(weaklim::BuiltinConvex::PhiIdentityish));
        } else if (name == "f_model") {
            rep = weaklim::energy(*map->map,
                                  weaklim::make_f_model(weaklim::make_builtin(weaklim::BuiltinConvex::PhiIdentityish),
                                                        weaklim::make_builtin(weaklim::BuiltinConvex::PowerA, 2.0)));
        } else {
            weaklim::fail_invalid("wl_energy_json: unknown model " + name);
        }
        *json_out = dup_string(rep.to_json());
    });
}

}  // extern "C"
