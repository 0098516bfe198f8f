#pragma once

#include <iosfwd>

namespace ptmesh
{
    /// Entry point of the `ptmesh` tool. Reports go to `out` as key=value
    /// lines, warnings and notices to `err`. Returns 0 on success, 1 on
    /// runtime failure and 2 on usage errors.
    int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err);
}
