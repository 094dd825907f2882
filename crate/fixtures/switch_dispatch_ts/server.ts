function callTool(name: string, args: any) {
  switch (name) {
    case "resize_image": {
      return resizeImage(args["width"], args["height"]);
    }
    case "crop_image":
      return cropImage(args);
    default:
      return null;
  }
}

function resizeImage(width: number, height: number) {
  return { width, height, resized: true };
}

function cropImage(args: any) {
  return { cropped: true, box: args };
}
