# SPDX-License-Identifier: BSD-3-Clause

"""One module per `hyperstat` subcommand; each provides `register(subparsers)` and
`main(args) -> exit code`."""
