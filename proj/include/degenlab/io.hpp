#pragma once

#include <string>
#include <vector>

#include "degenlab/mesh.hpp"
#include "degenlab/types.hpp"

namespace degenlab {

struct DtNMatrix;

// Incremental SHA-256 (hex digest).
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    void update(const void* data, std::size_t n);
    void update(const std::string& s) { update(s.data(), s.size()); }
    template <class T>
    void update_pod(const T& v) {
        update(&v, sizeof(T));
    }
    std::string hex();

private:
    void* ctx_;
};

// Digest of mesh coordinates, dimension and facet tags.
void hash_mesh(Sha256& h, const Mesh& mesh);

// Binary containers (little-endian, versioned).  Each starts with an 8-byte
// magic, a uint32 version and length-prefixed payload blocks.
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(const std::string& path);

void write_field(const std::string& path, const Mesh& mesh, const VectorXc& u, const std::string& name);
struct FieldFile {
    Mesh mesh;
    VectorXc values;
    std::string name;
};
FieldFile read_field(const std::string& path);

void write_dtn(const std::string& path, const DtNMatrix& m);
DtNMatrix read_dtn(const std::string& path);

// CSV exports.
void write_dtn_csv(const std::string& path, const DtNMatrix& m);
void write_field_csv(const std::string& path, const Mesh& mesh, const VectorXc& u);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Exclusive advisory lock held for the lifetime of the object.
class FileLock {
public:
    explicit FileLock(const std::string& path);
    ~FileLock();
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

// $DEGENLAB_CACHE if set, else $HOME/.cache/degenlab, else ./.degenlab-cache.
std::string default_cache_dir();

}  // namespace degenlab
