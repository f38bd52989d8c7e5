#pragma once

#define GRAPHNLS_VERSION "0.1.0"
