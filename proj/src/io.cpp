#include "degenlab/io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include <openssl/evp.h>

#include "degenlab/dtn.hpp"
#include "degenlab/error.hpp"

namespace degenlab {

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
        throw Error(ErrorKind::IoError, "SHA-256 initialisation failed");
}

Sha256::~Sha256() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256::update(const void* data, std::size_t n) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data, n);
}

std::string Sha256::hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), md, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

void hash_mesh(Sha256& h, const Mesh& mesh) {
    h.update_pod(mesh.dim());
    for (int a = 0; a < 3; ++a) {
        const auto& c = mesh.coords(a);
        h.update_pod(c.size());
        h.update(c.data(), c.size() * sizeof(double));
    }
    for (const auto& f : mesh.facets()) {
        const int rec[4] = {f.axis, f.side, f.cell, static_cast<int>(f.tag)};
        h.update(rec, sizeof(rec));
    }
}

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    Writer(const std::string& path, const char magic[8]) : out_(path, std::ios::binary) {
        if (!out_) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
        out_.write(magic, 8);
        pod(kVersion);
    }
    template <class T>
    void pod(const T& v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void str(const std::string& s) {
        pod(static_cast<std::uint64_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    template <class T>
    void vec(const std::vector<T>& v) {
        pod(static_cast<std::uint64_t>(v.size()));
        out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
    }
    void cvec(const cplx* data, std::size_t n) {
        pod(static_cast<std::uint64_t>(n));
        out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(cplx)));
    }
    void close(const std::string& path) {
        out_.close();
        if (!out_) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    Reader(const std::string& path, const char magic[8]) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
        char m[8];
        in_.read(m, 8);
        if (!in_ || std::string(m, 8) != std::string(magic, 8))
            throw Error(ErrorKind::IoError, "'" + path + "' is not a " + std::string(magic, 7) + " container");
        if (pod<std::uint32_t>() != kVersion) throw Error(ErrorKind::IoError, "unsupported container version");
    }
    template <class T>
    T pod() {
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        check();
        return v;
    }
    std::string str() {
        const auto n = pod<std::uint64_t>();
        limit(n);
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        check();
        return s;
    }
    template <class T>
    std::vector<T> vec() {
        const auto n = pod<std::uint64_t>();
        limit(n * sizeof(T));
        std::vector<T> v(n);
        in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
        check();
        return v;
    }
    VectorXc cvec() {
        const auto n = pod<std::uint64_t>();
        limit(n * sizeof(cplx));
        VectorXc v(static_cast<Eigen::Index>(n));
        in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(cplx)));
        check();
        return v;
    }

private:
    void check() {
        if (!in_) throw Error(ErrorKind::IoError, "truncated container '" + path_ + "'");
    }
    void limit(std::uint64_t bytes) {
        if (bytes > (std::uint64_t(1) << 36)) throw Error(ErrorKind::IoError, "corrupt block size in '" + path_ + "'");
    }
    std::ifstream in_;
    std::string path_;
};

constexpr char kMeshMagic[8] = {'D', 'G', 'L', 'M', 'E', 'S', 'H', '\0'};
constexpr char kFieldMagic[8] = {'D', 'G', 'L', 'F', 'L', 'D', '1', '\0'};
constexpr char kDtnMagic[8] = {'D', 'G', 'L', 'D', 'T', 'N', '1', '\0'};

void put_mesh(Writer& w, const Mesh& mesh) {
    w.pod(static_cast<std::int32_t>(mesh.dim()));
    w.pod(mesh.grading_ratio());
    for (int a = 0; a < 3; ++a) w.vec(mesh.coords(a));
    w.str(mesh.tag_predicate_name());
    std::vector<std::int32_t> tags;
    for (const auto& f : mesh.facets()) tags.push_back(static_cast<std::int32_t>(f.tag));
    w.vec(tags);
}

Mesh get_mesh(Reader& r) {
    const int dim = r.pod<std::int32_t>();
    const double ratio = r.pod<double>();
    std::array<std::vector<double>, 3> coords;
    for (int a = 0; a < 3; ++a) coords[a] = r.vec<double>();
    const std::string tagName = r.str();
    const auto tags = r.vec<std::int32_t>();
    Mesh mesh = mesh_from_coords(dim, coords, ratio);
    if (tags.size() != mesh.facets().size()) throw Error(ErrorKind::IoError, "facet count mismatch in container");
    std::map<std::tuple<int, int, int>, BoundaryTag> lookup;
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const Facet& f = mesh.facets()[i];
        if (tags[i] < 0 || tags[i] > 2) throw Error(ErrorKind::IoError, "invalid boundary tag in container");
        lookup[{f.axis, f.side, f.cell}] = static_cast<BoundaryTag>(tags[i]);
    }
    mesh.retag([lookup](const Mesh&, const Facet& f) { return lookup.at({f.axis, f.side, f.cell}); }, tagName);
    return mesh;
}

}  // namespace

void write_mesh(const std::string& path, const Mesh& mesh) {
    Writer w(path, kMeshMagic);
    put_mesh(w, mesh);
    w.close(path);
}

Mesh read_mesh(const std::string& path) {
    Reader r(path, kMeshMagic);
    return get_mesh(r);
}

void write_field(const std::string& path, const Mesh& mesh, const VectorXc& u, const std::string& name) {
    if (u.size() != mesh.num_vertices()) throw Error(ErrorKind::InvalidArgument, "field size does not match mesh");
    Writer w(path, kFieldMagic);
    put_mesh(w, mesh);
    w.str(name);
    w.cvec(u.data(), static_cast<std::size_t>(u.size()));
    w.close(path);
}

FieldFile read_field(const std::string& path) {
    Reader r(path, kFieldMagic);
    FieldFile f{get_mesh(r), VectorXc(), ""};
    f.name = r.str();
    f.values = r.cvec();
    if (f.values.size() != f.mesh.num_vertices()) throw Error(ErrorKind::IoError, "field size mismatch in container");
    return f;
}

void write_dtn(const std::string& path, const DtNMatrix& m) {
    Writer w(path, kDtnMagic);
    w.str(m.basis);
    w.str(m.potentialsDigest);
    std::vector<std::int32_t> dofs(m.sigma2Dofs.begin(), m.sigma2Dofs.end());
    w.vec(dofs);
    w.pod(static_cast<std::uint64_t>(m.entries.rows()));
    w.pod(static_cast<std::uint64_t>(m.entries.cols()));
    w.cvec(m.entries.data(), static_cast<std::size_t>(m.entries.size()));
    w.close(path);
}

DtNMatrix read_dtn(const std::string& path) {
    Reader r(path, kDtnMagic);
    DtNMatrix m;
    m.basis = r.str();
    m.potentialsDigest = r.str();
    const auto dofs = r.vec<std::int32_t>();
    m.sigma2Dofs.assign(dofs.begin(), dofs.end());
    const auto rows = r.pod<std::uint64_t>(), cols = r.pod<std::uint64_t>();
    const VectorXc data = r.cvec();
    if (static_cast<std::uint64_t>(data.size()) != rows * cols) throw Error(ErrorKind::IoError, "DtN size mismatch");
    m.entries = Eigen::Map<const MatrixXc>(data.data(), static_cast<Eigen::Index>(rows),
                                           static_cast<Eigen::Index>(cols));
    return m;
}

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_dtn_csv(const std::string& path, const DtNMatrix& m) {
    auto out = open_csv(path);
    out << "row,col,re,im\n";
    for (Eigen::Index j = 0; j < m.entries.cols(); ++j)
        for (Eigen::Index i = 0; i < m.entries.rows(); ++i)
            out << i << ',' << j << ',' << m.entries(i, j).real() << ',' << m.entries(i, j).imag() << '\n';
}

void write_field_csv(const std::string& path, const Mesh& mesh, const VectorXc& u) {
    auto out = open_csv(path);
    out << "x,y,z,re,im\n";
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Point& p = mesh.vertex(v);
        out << p[0] << ',' << p[1] << ',' << p[2] << ',' << u(v).real() << ',' << u(v).imag() << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    auto out = open_csv(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << '\n';
    }
}

FileLock::FileLock(const std::string& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw Error(ErrorKind::IoError, "cannot open lock file '" + path + "'");
    if (::flock(fd_, LOCK_EX) != 0) {
        ::close(fd_);
        throw Error(ErrorKind::IoError, "cannot lock '" + path + "'");
    }
}

FileLock::~FileLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

std::string default_cache_dir() {
    if (const char* e = std::getenv("DEGENLAB_CACHE"); e && *e) return e;
    if (const char* h = std::getenv("HOME"); h && *h) return (std::filesystem::path(h) / ".cache" / "degenlab").string();
    return ".degenlab-cache";
}

}  // namespace degenlab
