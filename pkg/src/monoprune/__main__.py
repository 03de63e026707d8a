from monoprune.cli import main

raise SystemExit(main())
