"""wavemaps-splitting - filtered Lie splitting for wave maps into the sphere."""
