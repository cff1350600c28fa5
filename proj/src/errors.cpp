#include "salience/errors.hpp"

namespace salience {

int exit_code_for(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config: return 2;
        case ErrorKind::Transport: return 3;
        case ErrorKind::Numerical: return 4;
        case ErrorKind::Schema: return 5;
        case ErrorKind::Io:
        case ErrorKind::Logic: return 1;
    }
    return 1;
}

}  // namespace salience
