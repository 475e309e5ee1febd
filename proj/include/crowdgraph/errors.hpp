#pragma once

#include <stdexcept>
#include <string>

namespace crowdgraph {

/// A parameter lies outside the domain of the operation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A task or worker index is outside [0, T) or [0, W).
class IndexOutOfRange : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// A task has no responses where the estimator needs at least one.
class MissingResponses : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stage-2 assignment was asked for more workers than a cluster holds.
class InsufficientCluster : public std::runtime_error {
public:
    InsufficientCluster(std::size_t cluster, std::size_t size, std::size_t needed)
        : std::runtime_error("cluster " + std::to_string(cluster) + " has " + std::to_string(size) +
                             " workers, fewer than the " + std::to_string(needed) + " required"),
          cluster_(cluster), size_(size), needed_(needed) {}

    std::size_t cluster() const noexcept { return cluster_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t needed() const noexcept { return needed_; }

private:
    std::size_t cluster_;
    std::size_t size_;
    std::size_t needed_;
};

/// The graphon kernel has a zero spectrum (sigma2 * beta * (1 - beta) == 0).
class DegenerateSpectrum : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

inline bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace detail

}  // namespace crowdgraph
