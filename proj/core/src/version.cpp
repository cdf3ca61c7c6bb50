#include "selforg/version.hpp"

namespace selforg {

const char* version() { return SELFORG_VERSION; }
const char* git_hash() { return SELFORG_GIT_HASH; }

}  // namespace selforg
