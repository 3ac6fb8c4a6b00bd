#include "abx/geometry.hpp"

#include "abx/errors.hpp"

namespace abx {

Path& Path::append(const Path& next, double tol) {
    if (next.pts.empty()) return *this;
    if (pts.empty()) {
        pts = next.pts;
        return *this;
    }
    if (dist(pts.back(), next.pts.front()) > tol)
        throw config_error("path concatenation: endpoints do not meet");
    pts.insert(pts.end(), next.pts.begin() + 1, next.pts.end());
    return *this;
}

} // namespace abx
