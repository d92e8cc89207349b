#pragma once

#define ESSR_VERSION "0.1.0"
