from haupt.cli import main


raise SystemExit(main())
