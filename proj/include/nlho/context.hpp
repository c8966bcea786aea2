#pragma once

#include "nlho/error.hpp"
#include "nlho/mono.hpp"

#include <gmpxx.h>

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace nlho {

using Rat = mpq_class;

// radicand of a declared square root: rational * monomial in the parameters,
// stored squarefree (|numerator*denominator| squarefree, exponents <= 1)
struct RootSym {
    Rat rational;
    Mono param_mono;
    std::string display;
};

struct ParamDecl {
    std::string name;
    bool nonzero = false;
};

// Declarations shared by every value of a computation: coordinate names,
// parameter names with nonvanishing flags, and the square-root registry.
// Contexts are immutable after setup and referenced by raw pointer from
// values; owners keep them alive via shared_ptr.
class Context {
public:
    Context(std::vector<std::string> coords, std::vector<ParamDecl> params = {})
        : coords_(std::move(coords)), params_(std::move(params)) {
        for (size_t i = 0; i < coords_.size(); ++i) {
            if (!index_.emplace(coords_[i], Sym{true, i}).second)
                throw Error("duplicate identifier: " + coords_[i]);
            std::string alias = "u" + std::to_string(i + 1);
            index_.emplace(alias, Sym{true, i}); // canonical names always accepted
        }
        for (size_t i = 0; i < params_.size(); ++i)
            if (!index_.emplace(params_[i].name, Sym{false, i}).second)
                throw Error("duplicate identifier: " + params_[i].name);
    }

    static std::shared_ptr<const Context> create(std::vector<std::string> coords,
                                                 std::vector<ParamDecl> params = {}) {
        return std::make_shared<const Context>(std::move(coords), std::move(params));
    }

    size_t ncoords() const { return coords_.size(); }
    size_t nparams() const { return params_.size(); }
    const std::string& coord_name(size_t i) const { return coords_[i]; }
    const ParamDecl& param(size_t i) const { return params_[i]; }

    struct Sym {
        bool is_coord;
        size_t index;
    };
    const Sym* lookup(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &it->second;
    }

    size_t nroots() const { return roots_.size(); }
    const RootSym& root(size_t i) const { return roots_[i]; }

    // Registers a square root with the given squarefree radicand data and
    // returns its index. Callers must have reduced the radicand first and
    // checked multiplicative independence (see Scalar::sqrt_of). Declare all
    // roots during setup, before values are shared across threads.
    size_t add_root(RootSym r) const {
        roots_.push_back(std::move(r));
        return roots_.size() - 1;
    }

private:
    std::vector<std::string> coords_;
    std::vector<ParamDecl> params_;
    mutable std::deque<RootSym> roots_; // append-only registry
    std::map<std::string, Sym> index_;
};

using ContextPtr = std::shared_ptr<const Context>;

} // namespace nlho
