// Copyright 2026 The Slipway Project Authors. All rights reserved.
// Use of this source code is governed by the Apache License 2.0
// that can be found in the LICENSE file.

#include <cstdio>

#include "CLI11.hpp"

int main(int argc, char** argv) {
  CLI::App app{"slipway: small-boat trailer docking toolkit"};
  app.require_subcommand(1);
  CLI11_PARSE(app, argc, argv);
  return 0;
}
